"""Hot numeric kernels for the bracket representation.

Every kernel exists twice: a vectorised numpy version and an explicit-loop
version compiled with numba. ``_backend.USE_NUMBA`` picks which pair the rest
of the package sees as :data:`moment_coeffs` and :data:`act_coeffs`, and
whether :func:`descend` is compiled. Both kernel pairs are always importable so
they can be compared in one process.

Coefficient layout: ``c[i, j, k]`` is the ``e_k`` component of ``mu(e_i, e_j)``.
"""
import numpy as np

from ._backend import USE_NUMBA, njit

# Objective values are only good to ~1e-15 relative. Below this much predicted
# decrease the Armijo test is noise and the line search falls back to
# requiring a smaller gradient.
ROUNDOFF_SLACK = 64 * np.finfo(float).eps

# relative singular-value cutoff of the step solve; smaller directions are
# stabilizer directions and carry only noise
STEP_RCOND = 1e-8

# largest |8 t A|_F a line-search step may use; keeps cond(exp(-8tA)) <= e^2 so
# the group action does not amplify rounding off the orbit
MAX_GROUP_STEP = 1.0

STATUS_CONVERGED = 0
STATUS_MAX_STEPS = 1
STATUS_STALLED = 2


# -- numpy -------------------------------------------------------------------

def moment_coeffs_numpy(c):
    """-4 sum_i ad_i^T ad_i + 2 sum_i ad_i ad_i^T for ``(ad_i)_{kj} = c[i,j,k]``."""
    q = np.einsum("aik,bik->ab", c, c)
    p = np.einsum("ijk,ijl->kl", c, c)
    return -4.0 * q + 2.0 * p


def act_coeffs_numpy(a, c):
    """Infinitesimal action ``(A.mu)(x, y) = A mu(x, y) - mu(Ax, y) - mu(x, Ay)``."""
    return (np.einsum("kl,ijl->ijk", a, c)
            - np.einsum("li,ljk->ijk", a, c)
            - np.einsum("lj,ilk->ijk", a, c))


# -- numba -------------------------------------------------------------------

@njit
def moment_coeffs_numba(c):
    n = c.shape[0]
    m = np.zeros((n, n))
    for a in range(n):
        for b in range(a, n):
            q = 0.0
            p = 0.0
            for i in range(n):
                for k in range(n):
                    q += c[a, i, k] * c[b, i, k]
                    p += c[i, k, a] * c[i, k, b]
            v = -4.0 * q + 2.0 * p
            m[a, b] = v
            m[b, a] = v
    return m


@njit
def act_coeffs_numba(a, c):
    n = c.shape[0]
    out = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                s = 0.0
                for l in range(n):
                    s += a[k, l] * c[i, j, l] - a[l, i] * c[l, j, k] - a[l, j] * c[i, l, k]
                out[i, j, k] = s
    return out


@njit
def group_act_coeffs_numba(g, g_inv, c):
    n = c.shape[0]
    t1 = np.zeros((n, n, n))
    t2 = np.zeros((n, n, n))
    out = np.zeros((n, n, n))
    for i in range(n):
        for b in range(n):
            for r in range(n):
                s = 0.0
                for p in range(n):
                    s += g_inv[p, i] * c[p, b, r]
                t1[i, b, r] = s
    for i in range(n):
        for j in range(n):
            for r in range(n):
                s = 0.0
                for p in range(n):
                    s += g_inv[p, j] * t1[i, p, r]
                t2[i, j, r] = s
    for i in range(n):
        for j in range(n):
            for k in range(n):
                s = 0.0
                for p in range(n):
                    s += g[k, p] * t2[i, j, p]
                out[i, j, k] = s
    return out


def group_act_coeffs_numpy(g, g_inv, c):
    """Group action ``(g.mu)(x, y) = g mu(g^-1 x, g^-1 y)`` given ``g`` and its inverse."""
    return np.einsum("kr,pi,qj,pqr->ijk", g, g_inv, g_inv, c, optimize=True)


# -- projected descent ---------------------------------------------------------
# One loop, two builds: with numba on, these functions are compiled and call the
# compiled kernels; with numba off they run as plain Python over numpy kernels.

if USE_NUMBA:
    _moment = moment_coeffs_numba
    _act = act_coeffs_numba
    _group_act = group_act_coeffs_numba
    _maybe_njit = njit
else:
    _moment = moment_coeffs_numpy
    _act = act_coeffs_numpy
    _group_act = group_act_coeffs_numpy

    def _maybe_njit(func):
        return func


@_maybe_njit
def expm_small(a):
    """Matrix exponential by scaling and squaring of a degree-18 Taylor polynomial."""
    n = a.shape[0]
    norm = 0.0
    for j in range(n):
        col = 0.0
        for i in range(n):
            col += abs(a[i, j])
        norm = max(norm, col)
    squarings = 0
    while norm > 0.5:
        norm *= 0.5
        squarings += 1
    x = a / (2.0 ** squarings)
    out = np.eye(n)
    term = np.eye(n)
    for k in range(1, 19):
        term = term @ x / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


@_maybe_njit
def antisymmetrize(c):
    """Project onto tensors skew in the first two slots; removes accumulated rounding."""
    n = c.shape[0]
    out = np.empty_like(c)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                out[i, j, k] = 0.5 * (c[i, j, k] - c[j, i, k])
    return out


@_maybe_njit
def project_moment(m, basis, use_basis):
    """Orthogonal projection of ``m`` onto the span of the trace-orthonormal ``basis``."""
    if not use_basis:
        return m
    out = np.zeros_like(m)
    for r in range(basis.shape[0]):
        out += np.sum(m * basis[r]) * basis[r]
    return out


@_maybe_njit
def projective_objective(c, basis, use_basis):
    """|m[c]|^2 with the moment optionally projected; invariant under rescaling ``c``."""
    s2 = np.sum(c * c)
    m = project_moment(_moment(c), basis, use_basis)
    return np.sum(m * m) / (s2 * s2)


@_maybe_njit
def objective_and_grad_norm(c, basis, use_basis):
    """``(|m[c]|^2, |grad|)`` at ``c / |c|`` for the optionally projected moment."""
    u = c / np.sqrt(np.sum(c * c))
    m = project_moment(_moment(u), basis, use_basis)
    w = _act(m, u)
    w_tan = w - np.sum(w * u) * u
    return np.sum(m * m), 8.0 * np.sqrt(np.sum(w_tan * w_tan))


@_maybe_njit
def step_generator(u, target, gens):
    """Minimum-norm ``A`` in span(gens) with ``(A.u)_tan = target``.

    Returns ``(A, realized)`` where ``realized`` is the tangent vector ``A``
    actually produces (equal to ``target`` when it is reachable).

    Near a critical point the moment is ``c Id + D`` with ``D`` a derivation of
    the limit. Stepping by ``exp(-8tD)`` is exact in theory but stretches
    rounding errors off the orbit, and the nilpotent critical points are saddles
    in the ambient space, so those errors run away. Skew generators let the
    same tangent vector be produced by an ``A`` that shrinks to zero instead.
    """
    n = u.shape[0]
    r = gens.shape[0]
    rows = n * (n - 1) // 2 * n
    lin = np.zeros((rows, r))
    tgt = np.zeros(rows)
    for q in range(r):
        v = _act(gens[q], u)
        v = v - np.sum(v * u) * u
        row = 0
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(n):
                    lin[row, q] = v[i, j, k]
                    row += 1
    row = 0
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                tgt[row] = target[i, j, k]
                row += 1
    coef = np.linalg.lstsq(lin, tgt, STEP_RCOND)[0]
    a = np.zeros((n, n))
    for q in range(r):
        a += coef[q] * gens[q]
    realized = _act(a, u)
    realized = realized - np.sum(realized * u) * u
    return a, realized


@_maybe_njit
def descend(c0, basis, use_basis, gens, max_steps, step0, line_search, shrink,
            armijo, grad_tol, renormalize_every, sample_every):
    """Descent of |m[.]|^2 from ``c0``, backtracking unless ``line_search`` is off.

    ``basis`` is a trace-orthonormal basis of the symmetric directions the flow
    may use; ``use_basis`` says whether it is a proper subspace of symm(n), in
    which case the moment is projected onto it first. ``gens`` spans the group
    directions a step may be built from (``basis`` plus compatible skew
    matrices). A step of length ``t`` moves ``mu`` by ``exp(-8 t A)`` with ``A``
    from :func:`step_generator`, so iterates stay in the orbit of ``c0`` and, to
    first order, follow the negative gradient. Without line search every step
    has length ``step0`` and the objective may rise.

    Returns ``(mu, steps, grad_norm, objective, status, samples)`` where ``mu``
    is unit norm and ``samples`` rows are ``(step, objective, grad_norm)``.
    """
    mu = c0 / np.sqrt(np.sum(c0 * c0))
    n_samples_max = 2
    if sample_every > 0:
        n_samples_max = max_steps // sample_every + 2
    samples = np.zeros((n_samples_max, 3))
    n_samples = 0
    t = step0
    steps = 0
    status = STATUS_MAX_STEPS
    f = 0.0
    gn = 0.0
    while True:
        s = np.sqrt(np.sum(mu * mu))
        u = mu / s
        m = project_moment(_moment(u), basis, use_basis)
        f = np.sum(m * m)
        w = _act(m, u)
        w_tan = w - np.sum(w * u) * u
        gn = 8.0 * np.sqrt(np.sum(w_tan * w_tan))
        if sample_every > 0 and steps % sample_every == 0 and n_samples < n_samples_max:
            samples[n_samples, 0] = steps
            samples[n_samples, 1] = f
            samples[n_samples, 2] = gn
            n_samples += 1
        if gn <= grad_tol:
            status = STATUS_CONVERGED
            break
        if steps >= max_steps:
            status = STATUS_MAX_STEPS
            break
        a, realized = step_generator(u, w_tan, gens)
        # slope of the objective along exp(-8tA) at t = 0
        slope = 64.0 * np.sum(w_tan * realized)
        if line_search:
            t = min(step0, 2.0 * t)
            a_norm = np.sqrt(np.sum(a * a))
            if a_norm > 0.0:
                t = min(t, MAX_GROUP_STEP / (8.0 * a_norm))
        else:
            t = step0
        accepted = False
        trial = u
        while t > 1e-18:
            e = expm_small(-8.0 * t * a)
            e_inv = expm_small(8.0 * t * a)
            trial = _group_act(e, e_inv, u)
            if not line_search:
                accepted = True
                break
            ft = projective_objective(trial, basis, use_basis)
            if armijo * t * slope > ROUNDOFF_SLACK * f:
                if ft <= f - armijo * t * slope:
                    accepted = True
                    break
            elif ft <= f + ROUNDOFF_SLACK * f:
                # objective is flat to rounding here; require the gradient to shrink
                if objective_and_grad_norm(trial, basis, use_basis)[1] < gn:
                    accepted = True
                    break
            t *= shrink
        if not accepted:
            status = STATUS_STALLED
            break
        steps += 1
        trial = antisymmetrize(trial)
        if renormalize_every > 0 and steps % renormalize_every == 0:
            trial = trial / np.sqrt(np.sum(trial * trial))
        mu = trial
    if sample_every > 0 and n_samples < n_samples_max:
        if n_samples == 0 or samples[n_samples - 1, 0] != steps:
            samples[n_samples, 0] = steps
            samples[n_samples, 1] = f
            samples[n_samples, 2] = gn
            n_samples += 1
    mu = mu / np.sqrt(np.sum(mu * mu))
    return mu, steps, gn, f, status, samples[:n_samples]


moment_coeffs = _moment
act_coeffs = _act
group_act_coeffs = _group_act

BACKEND = "numba" if USE_NUMBA else "numpy"
