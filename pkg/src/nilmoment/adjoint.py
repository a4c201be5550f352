"""Nilpotent matrices under conjugation: the moment map ``X X^T - X^T X``,
Jordan-type representatives that are critical for it, and classification by
partitions through the rank sequence of powers.
"""
from dataclasses import dataclass

import numpy as np

from ._linalg import orthonormalize
from .errors import NotNilpotent, NotThetaStable
from .lie_core import skew_basis

NILPOTENCY_RTOL = 1e-8
RANK_TOL = 1e-7
DISTINGUISHED_TOL = 1e-8
SPAN_TOL = 1e-9


@dataclass(frozen=True)
class Partition:
    parts: tuple

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if not parts or any(p < 1 for p in parts):
            raise ValueError("partition parts must be positive integers")
        if any(parts[q] < parts[q + 1] for q in range(len(parts) - 1)):
            raise ValueError("partition parts must be weakly decreasing")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def parse(cls, text):
        return cls(tuple(int(x) for x in text.replace(" ", "").split(",") if x))

    @property
    def n(self):
        return sum(self.parts)

    def __str__(self):
        return ",".join(str(p) for p in self.parts)


def adjoint_moment(x):
    """``X X^T - X^T X``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {x.shape}")
    m = x @ x.T - x.T @ x
    return 0.5 * (m + m.T)


def jordan_block(k):
    """Nilpotent k x k block with superdiagonal ``sqrt(i (k - i) / 2)``, i = 1..k-1."""
    out = np.zeros((k, k))
    for i in range(1, k):
        out[i - 1, i] = np.sqrt(i * (k - i) / 2.0)
    return out


def jordan_rep(partition):
    """Block-diagonal representative of the orbit labelled by ``partition``; satisfies ``[m(X), X] = X``."""
    n = partition.n
    out = np.zeros((n, n))
    start = 0
    for k in partition.parts:
        out[start:start + k, start:start + k] = jordan_block(k)
        start += k
    return out


def verify_adjoint_distinguished(x, tol=DISTINGUISHED_TOL):
    """``c`` with ``[m(X), X] = c X`` within ``tol`` at unit scale, else None.

    ``c`` is reported at the scale of ``X``; the zero matrix gives 0.
    """
    x = np.asarray(x, dtype=float)
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        return 0.0
    u = x / nrm
    m = adjoint_moment(u)
    w = m @ u - u @ m
    c = float(np.sum(w * u))
    if np.linalg.norm(w - c * u) > tol:
        return None
    return c * nrm * nrm


def is_nilpotent(x, rtol=NILPOTENCY_RTOL):
    """Certificate ``|X^n| <= rtol |X|^n`` in the spectral norm."""
    x = np.asarray(x, dtype=float)
    nrm = np.linalg.norm(x, 2)
    if nrm == 0.0:
        return True
    u = x / nrm
    return np.linalg.norm(np.linalg.matrix_power(u, x.shape[0]), 2) <= rtol


def power_ranks(x, tol=RANK_TOL):
    """``[rank X^0, rank X^1, ..., rank X^n]``.

    A singular value of ``X^k`` counts when it exceeds ``tol |X|^k``; a
    threshold relative to ``X^k`` itself would promote rounding in a
    vanishing power to rank.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    nrm = np.linalg.norm(x, 2)
    ranks = [n]
    if nrm == 0.0:
        return ranks + [0] * n
    u = x / nrm
    p = np.eye(n)
    for _ in range(n):
        p = p @ u
        sv = np.linalg.svd(p, compute_uv=False)
        ranks.append(int(np.sum(sv > tol)))
    return ranks


def classify_nilpotent_orbit(x, tol=RANK_TOL):
    """Jordan type of a nilpotent matrix from the ranks of its powers."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {x.shape}")
    if not is_nilpotent(x):
        raise NotNilpotent("matrix fails the nilpotency certificate |X^n| <= 1e-8 |X|^n")
    r = power_ranks(x, tol) + [0]
    parts = []
    for k in range(len(r) - 2, 0, -1):
        # blocks of size exactly k
        count = (r[k - 1] - r[k]) - (r[k] - r[k + 1])
        parts.extend([k] * count)
    if sum(parts) != x.shape[0]:
        raise NotNilpotent(f"rank sequence {r[:-1]} is not that of a nilpotent matrix")
    return Partition(tuple(parts))


def enumerate_partitions(n):
    """All partitions of ``n`` in ascending lexicographic order of their parts."""
    if n < 1:
        raise ValueError("n must be positive")

    def gen(rest, cap):
        if rest == 0:
            yield ()
            return
        for first in range(1, min(rest, cap) + 1):
            for tail in gen(rest - first, first):
                yield (first,) + tail

    return [Partition(p) for p in gen(n, n)]


def random_nilpotent(n, rng):
    """Random nilpotent matrix: a sparse strictly upper triangular matrix rotated by a random orthogonal map.

    Nonzero entries have magnitude in [0.5, 1.5] so that rank decisions on the
    powers are well conditioned.
    """
    signs = rng.choice([-1.0, 1.0], size=(n, n))
    upper = np.triu(signs * rng.uniform(0.5, 1.5, size=(n, n)), 1)
    upper *= rng.random((n, n)) < rng.uniform(0.2, 1.0)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    return q @ upper @ q.T


# -- subalgebras ------------------------------------------------------------------

def sl_basis(n):
    """Trace-orthonormal basis of sl(n)."""
    out = []
    for i in range(n):
        for j in range(n):
            if i != j:
                e = np.zeros((n, n))
                e[i, j] = 1.0
                out.append(e)
    for k in range(1, n):
        d = np.zeros((n, n))
        d[:k, :k] = np.eye(k)
        d[k, k] = -k
        out.append(d / np.sqrt(k * (k + 1)))
    return out


def so_basis(n):
    return skew_basis(n)


def block_sl_basis(sizes):
    """sl of each diagonal block, embedded in gl(sum(sizes))."""
    n = sum(sizes)
    out, start = [], 0
    for k in sizes:
        for e in sl_basis(k):
            big = np.zeros((n, n))
            big[start:start + k, start:start + k] = e
            out.append(big)
        start += k
    return out


def _span_residual(mat, onb):
    proj = sum((np.sum(mat * e) * e for e in onb), np.zeros_like(mat))
    return float(np.linalg.norm(mat - proj))


def subalgebra_detection_check(x, g_basis, tol=SPAN_TOL):
    """Whether ``m(X)`` lies in the span of ``g_basis`` for ``X`` in that span.

    The span must be closed under commutators and transposition; otherwise
    :class:`NotThetaStable` is raised. ``X`` outside the span is a ``ValueError``.
    """
    mats = [np.asarray(b, dtype=float) for b in g_basis]
    onb = orthonormalize(mats)
    if not onb:
        raise ValueError("empty subalgebra basis")
    for i, a in enumerate(onb):
        if _span_residual(a.T, onb) > tol:
            raise NotThetaStable(f"transpose of basis element {i} leaves the span")
        for j in range(i + 1, len(onb)):
            b = onb[j]
            if _span_residual(a @ b - b @ a, onb) > tol:
                raise NotThetaStable(f"commutator of basis elements {i} and {j} leaves the span")
    x = np.asarray(x, dtype=float)
    xn = np.linalg.norm(x)
    if xn > 0 and _span_residual(x, onb) > tol * xn:
        raise ValueError("X is not in the span of the subalgebra basis")
    m = adjoint_moment(x)
    mn = np.linalg.norm(m)
    if mn == 0.0:
        return True
    return _span_residual(m, onb) <= tol * mn
