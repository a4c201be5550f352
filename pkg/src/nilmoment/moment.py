"""Moment maps: the closed form for brackets, the generic one from the defining
identity ``<<m(v), A>> = 2 <A.v, v>``, and the gradient of ``|m[.]|^2``.

Symmetric matrices are plain ``(n, n)`` float arrays, symmetrized on output.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .errors import NonOrthonormalBasis, ZeroVector
from .lie_core import (BracketTensor, gl_infinitesimal_act, inner_product,
                       symmetric_basis)

GRAM_TOL = 1e-8
DISTINGUISHED_TOL = 1e-8


def _sym(m):
    return 0.5 * (m + m.T)


def moment_bracket(mu):
    """``m(mu) = -4 sum_i ad_i^T ad_i + 2 sum_i ad_i ad_i^T`` with ``ad_i = mu(e_i, .)``."""
    return _sym(kernels.moment_coeffs(mu.coeffs))


def moment_projective(mu):
    """``m(mu) / <mu, mu>``, unchanged by positive rescaling."""
    s2 = inner_product(mu, mu)
    if s2 == 0.0:
        raise ZeroVector("projective moment is undefined at the zero bracket")
    return moment_bracket(mu) / s2


def moment_norm_sq(mu):
    """The flow objective ``|m[mu]|^2``."""
    m = moment_projective(mu)
    return float(np.sum(m * m))


@dataclass(frozen=True)
class ActionBasis:
    """Orthonormal symmetric generators plus the representation they act on.

    ``apply(A, v)`` is the infinitesimal action and ``inner(v, w)`` the
    invariant inner product on the representation space.
    """

    generators: tuple
    apply: Callable
    inner: Callable

    def gram(self):
        g = self.generators
        return np.array([[float(np.sum(a * b)) for b in g] for a in g])


def bracket_action_basis(n, generators=None):
    """GL(n) acting on brackets of R^n, with symm(n) (or ``generators``) as directions."""
    gens = symmetric_basis(n) if generators is None else generators
    return ActionBasis(tuple(np.asarray(e, dtype=float) for e in gens),
                       gl_infinitesimal_act, inner_product)


def _traceless_symmetric_basis(n):
    out = [e for e in symmetric_basis(n) if np.trace(e) == 0.0]
    for k in range(1, n):
        d = np.zeros((n, n))
        d[:k, :k] = np.eye(k)
        d[k, k] = -k
        out.append(d / np.sqrt(k * (k + 1)))
    return out


def _commutator(a, x):
    return a @ x - x @ a


def _half_trace_inner(x, y):
    return 0.5 * float(np.sum(x * y))


def adjoint_action_basis(n):
    """SL(n) acting on sl(n) by conjugation; directions are traceless symmetric matrices.

    The representation carries ``<X, Y> = tr(X Y^T) / 2``, the normalization
    under which the generic moment map reproduces ``X X^T - X^T X``.
    """
    return ActionBasis(tuple(_traceless_symmetric_basis(n)), _commutator, _half_trace_inner)


def moment_generic(basis, v):
    """``sum_r 2 <E_r . v, v> E_r`` over the orthonormal generators of ``basis``."""
    gram = basis.gram()
    dev = float(np.max(np.abs(gram - np.eye(len(basis.generators))))) if len(gram) else 0.0
    if dev > GRAM_TOL:
        raise NonOrthonormalBasis(f"generator Gram matrix deviates from identity by {dev:.3e}")
    shape = basis.generators[0].shape
    out = np.zeros(shape)
    for e in basis.generators:
        out += 2.0 * basis.inner(basis.apply(e, v), v) * e
    return _sym(out)


def _unit(mu):
    nrm = mu.norm()
    if nrm == 0.0:
        raise ZeroVector("the zero bracket has no direction")
    return BracketTensor(mu.coeffs / nrm), nrm


def grad_norm_sq(mu, atol=1e-10):
    """Gradient of ``F = |m[.]|^2`` on the unit sphere at the unit bracket ``mu``.

    ``8 (m.mu)`` minus its radial part, the factor 8 being what finite
    differences of ``F`` confirm.
    """
    nrm = mu.norm()
    if nrm == 0.0:
        raise ZeroVector("gradient undefined at the zero bracket")
    if abs(nrm - 1.0) > atol:
        raise ValueError(f"expected a unit bracket, got norm {nrm!r}")
    w = 8.0 * kernels.act_coeffs(moment_bracket(mu), mu.coeffs)
    return BracketTensor(w - np.sum(w * mu.coeffs) * mu.coeffs)


def criticality(mu):
    """``(c, residual)`` for ``m(u).u = c u`` at ``u = mu/|mu|``, with ``c`` rescaled to ``mu``'s norm."""
    u, nrm = _unit(mu)
    w = kernels.act_coeffs(moment_bracket(u), u.coeffs)
    c = float(np.sum(w * u.coeffs))
    residual = float(np.sqrt(np.sum((w - c * u.coeffs) ** 2)))
    return c * nrm * nrm, residual


def is_distinguished(mu, tol=DISTINGUISHED_TOL):
    """``c`` with ``m(mu).mu = c mu`` when that holds within ``tol`` at unit scale, else None.

    The residual is measured after normalizing ``mu``; ``c`` is reported at the
    input's own scale (it grows like ``|mu|^2``).
    """
    c, residual = criticality(mu)
    return c if residual <= tol else None
