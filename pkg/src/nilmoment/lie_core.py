"""Skew-symmetric brackets as dense structure constants, and the GL(n) action on them.

A bracket ``mu`` on R^n is stored as ``c[i, j, k]``, the ``e_k`` component of
``mu(e_i, e_j)``, over all ordered pairs ``(i, j)``. Indices are 0-based in
code; the file format (see :mod:`nilmoment.io`) is 1-based.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._linalg import null_space, numerical_rank, range_basis
from .errors import DimensionMismatch, JacobiViolation, NotNilpotent, SingularMatrix

ANTISYMMETRY_TOL = 1e-12
JACOBI_TOL = 1e-9
RANK_RTOL = 1e-9
DERIVATION_RTOL = 1e-9
MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class BracketTensor:
    """Structure constants of a skew-symmetric bilinear map R^n x R^n -> R^n.

    The coefficient array is copied and made read-only on construction.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if np.iscomplexobj(c):
            raise TypeError("structure constants must be real")
        c = np.array(c, dtype=float)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]) or c.shape[0] < 1:
            raise DimensionMismatch(f"expected an (n, n, n) array, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("structure constants must be finite")
        scale = max(1.0, float(np.max(np.abs(c))))
        asym = float(np.max(np.abs(c + c.transpose(1, 0, 2))))
        if asym > ANTISYMMETRY_TOL * scale:
            raise ValueError(f"structure constants are not antisymmetric in (i, j): defect {asym:.3e}")
        c = 0.5 * (c - c.transpose(1, 0, 2))
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def dim(self):
        return self.coeffs.shape[0]

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((n, n, n)))

    @classmethod
    def from_constants(cls, n, constants):
        """Build from ``{(i, j, k): c}`` with 0-based indices, setting c_ij^k = c and c_ji^k = -c."""
        c = np.zeros((n, n, n))
        for (i, j, k), value in constants.items():
            if i == j:
                if value != 0:
                    raise ValueError(f"c_{{{i}{i}}}^{k} must vanish")
                continue
            c[i, j, k] = value
            c[j, i, k] = -value
        return cls(c)

    def norm(self):
        return float(np.sqrt(np.sum(self.coeffs * self.coeffs)))

    def normalized(self):
        nrm = self.norm()
        if nrm == 0.0:
            from .errors import ZeroVector
            raise ZeroVector("cannot normalize the zero bracket")
        return BracketTensor(self.coeffs / nrm)

    def is_zero(self):
        return not np.any(self.coeffs)

    def __add__(self, other):
        _check_same_dim(self, other)
        return BracketTensor(self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_same_dim(self, other)
        return BracketTensor(self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return BracketTensor(float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self):
        return BracketTensor(-self.coeffs)

    def allclose(self, other, atol=1e-12):
        return self.dim == other.dim and bool(np.allclose(self.coeffs, other.coeffs, rtol=0.0, atol=atol))

    def __repr__(self):
        nz = int(np.count_nonzero(np.abs(self.coeffs) > 0)) // 2
        return f"BracketTensor(dim={self.dim}, nonzero_pairs={nz})"


def _check_same_dim(a, b):
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimension mismatch: {a.dim} vs {b.dim}")


# -- standard examples ---------------------------------------------------------

def heisenberg(scale=1.0):
    """3-dimensional Heisenberg algebra, [e1, e2] = scale * e3."""
    return BracketTensor.from_constants(3, {(0, 1, 2): scale})


def abelian(n):
    return BracketTensor.zero(n)


def filiform(n):
    """Standard filiform algebra [e1, e_i] = e_{i+1}, i = 2..n-1."""
    return BracketTensor.from_constants(n, {(0, i, i + 1): 1.0 for i in range(1, n - 1)})


def direct_sum(first, second):
    """Bracket on R^(n1+n2) acting as ``first`` on the leading and ``second`` on the trailing coordinates."""
    n1, n2 = first.dim, second.dim
    c = np.zeros((n1 + n2,) * 3)
    c[:n1, :n1, :n1] = first.coeffs
    c[n1:, n1:, n1:] = second.coeffs
    return BracketTensor(c)


def random_bracket(n, rng):
    """Gaussian element of the space of skew brackets; generally not a Lie bracket."""
    c = rng.standard_normal((n, n, n))
    return BracketTensor(c - c.transpose(1, 0, 2))


# -- matrix bases ------------------------------------------------------------------

def symmetric_basis(n):
    """Trace-orthonormal basis of symm(n): E_ii and (E_ij + E_ji)/sqrt(2)."""
    out = []
    for i in range(n):
        for j in range(i, n):
            e = np.zeros((n, n))
            if i == j:
                e[i, i] = 1.0
            else:
                e[i, j] = e[j, i] = np.sqrt(0.5)
            out.append(e)
    return out


def skew_basis(n):
    """Trace-orthonormal basis of so(n)."""
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n))
            e[i, j] = np.sqrt(0.5)
            e[j, i] = -np.sqrt(0.5)
            out.append(e)
    return out


def matrix_unit_basis(n):
    out = []
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n))
            e[i, j] = 1.0
            out.append(e)
    return out


# -- operations ------------------------------------------------------------------

def bracket_apply(mu, x, y):
    """Evaluate ``mu(x, y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (mu.dim,) or y.shape != (mu.dim,):
        raise DimensionMismatch(f"vectors must have shape ({mu.dim},), got {x.shape} and {y.shape}")
    return np.einsum("i,j,ijk->k", x, y, mu.coeffs)


def jacobi_tensor(mu):
    """``J[i, j, k] = mu(mu(e_i,e_j),e_k) + mu(mu(e_j,e_k),e_i) + mu(mu(e_k,e_i),e_j)``."""
    t = np.einsum("ijl,lkm->ijkm", mu.coeffs, mu.coeffs)
    return t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)


def jacobi_residual(mu):
    """Largest norm of the Jacobiator over basis triples; zero exactly for Lie brackets."""
    jac = jacobi_tensor(mu)
    return float(np.max(np.linalg.norm(jac, axis=3)))


def check_lie(mu, tol=JACOBI_TOL):
    """Raise :class:`JacobiViolation` unless ``mu / |mu|`` satisfies Jacobi within ``tol``."""
    if mu.is_zero():
        return
    residual = jacobi_residual(mu.normalized())
    if residual > tol:
        raise JacobiViolation(residual, tol)


def nilpotency_class(mu, tol=JACOBI_TOL):
    """Step of nilpotency from the lower central series.

    The zero bracket has class 1. Raises :class:`NotNilpotent` when the series
    stalls at a nonzero subspace, and :class:`JacobiViolation` on non-Lie input.
    """
    check_lie(mu, tol)
    n = mu.dim
    if mu.is_zero():
        return 1
    c = mu.normalized().coeffs
    term = np.eye(n)  # columns span the current term of the series
    step = 0
    while True:
        step += 1
        # [N, C_k] spanned by mu(e_i, v) for basis e_i and spanning vectors v
        images = np.einsum("ijk,jq->kiq", c, term).reshape(n, -1)
        nxt = range_basis(images, rtol=0.0, atol=RANK_RTOL)
        if nxt.shape[1] == 0:
            return step
        if nxt.shape[1] == term.shape[1]:
            raise NotNilpotent(f"not nilpotent: lower central series stabilizes in dimension {nxt.shape[1]}")
        term = nxt


def gl_act(g, mu, max_condition=MAX_CONDITION):
    """Change-of-basis action ``(g.mu)(x, y) = g mu(g^-1 x, g^-1 y)``."""
    g = np.asarray(g, dtype=float)
    if g.shape != (mu.dim, mu.dim):
        raise DimensionMismatch(f"matrix must be {mu.dim}x{mu.dim}, got {g.shape}")
    cond = np.linalg.cond(g)
    if not np.isfinite(cond) or cond > max_condition:
        raise SingularMatrix(f"condition number {cond:.3e} exceeds {max_condition:.1e}")
    g_inv = np.linalg.inv(g)
    return BracketTensor(kernels.group_act_coeffs(np.ascontiguousarray(g), g_inv, mu.coeffs))


def gl_infinitesimal_act(a, mu):
    """Derivative of :func:`gl_act` at the identity in direction ``a``.

    ``(A.mu)(x, y) = A mu(x, y) - mu(Ax, y) - mu(x, Ay)``; vanishes iff ``A`` is a derivation.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (mu.dim, mu.dim):
        raise DimensionMismatch(f"matrix must be {mu.dim}x{mu.dim}, got {a.shape}")
    return BracketTensor(kernels.act_coeffs(np.ascontiguousarray(a), mu.coeffs))


def inner_product(lam, mu):
    """``<lam, mu> = sum_ijk lam_ij^k mu_ij^k`` over ordered pairs (each unordered pair counts twice)."""
    _check_same_dim(lam, mu)
    return float(np.sum(lam.coeffs * mu.coeffs))


@dataclass(frozen=True)
class DerivationBasis:
    """Trace-orthonormal basis of (symmetric) derivations of a bracket."""

    dim: int
    elements: tuple
    symmetric_only: bool = False

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def contains(self, d, tol=1e-9):
        """Whether ``d`` lies in the span, relative to its own norm."""
        d = np.asarray(d, dtype=float)
        nrm = np.linalg.norm(d)
        if nrm == 0.0:
            return True
        proj = sum((np.sum(d * e) * e for e in self.elements), np.zeros_like(d))
        return float(np.linalg.norm(d - proj)) <= tol * nrm


def derivation_space(mu, symmetric_only=False, rtol=DERIVATION_RTOL):
    """Kernel of ``A -> A.mu`` on gl(n), or on symm(n) when ``symmetric_only``."""
    check_lie(mu)
    n = mu.dim
    basis = symmetric_basis(n) if symmetric_only else matrix_unit_basis(n)
    if mu.is_zero():
        return DerivationBasis(n, tuple(basis), symmetric_only)
    c = mu.normalized().coeffs
    system = np.stack([kernels.act_coeffs(e, c).ravel() for e in basis], axis=1)
    kernel = null_space(system, rtol)
    elements = tuple(sum(kernel[q, r] * basis[q] for q in range(len(basis)))
                     for r in range(kernel.shape[1]))
    return DerivationBasis(n, elements, symmetric_only)


def derivation_rank(mu, symmetric_only=False):
    """Dimension of the derivation space, without building its basis."""
    n = mu.dim
    basis = symmetric_basis(n) if symmetric_only else matrix_unit_basis(n)
    if mu.is_zero():
        return len(basis)
    c = mu.normalized().coeffs
    system = np.stack([kernels.act_coeffs(e, c).ravel() for e in basis], axis=1)
    return len(basis) - numerical_rank(system, DERIVATION_RTOL)
