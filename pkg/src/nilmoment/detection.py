"""Block structures from symmetric derivations and the checks that the moment map
respects them.

A symmetric derivation ``D`` splits R^n into eigenspaces ``V_a``. The brackets
``lam`` with ``D.lam = 0`` form a linear subspace W, characterized by
``lam(V_a, V_b) in V_{a+b}``, and the block group H = prod GL(V_a) preserves it.
The checks below test that ``m(lam)`` is block diagonal for ``lam`` in W, that
graded brackets are exactly W, and that the G- and H-orbit tangents agree
inside W. Sums of ideals are the special case of a two-block split.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._linalg import null_space, numerical_rank, range_basis
from .errors import NonCommutingDerivations, NotAnIdealSum, NotInW
from .lie_core import BracketTensor, matrix_unit_basis, symmetric_basis
from .moment import moment_bracket

GAP_TOL = 1e-7
CHECK_TOL = 1e-9
COMMUTATOR_TOL = 1e-9
RANK_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class BlockStructure:
    """Orthonormal eigenbasis grouped into blocks of equal weight.

    ``weights[a]`` holds one eigenvalue per derivation for block ``a`` (a single
    column when built from one derivation); blocks are sorted by weight. The
    columns ``basis[:, slices[a]]`` span block ``a``.
    """

    dim: int
    weights: np.ndarray
    basis: np.ndarray
    block_sizes: tuple

    @property
    def eigenvalues(self):
        if self.weights.shape[1] == 1:
            return [float(w) for w in self.weights[:, 0]]
        return [tuple(float(x) for x in w) for w in self.weights]

    @property
    def slices(self):
        out, start = [], 0
        for size in self.block_sizes:
            out.append(slice(start, start + size))
            start += size
        return out

    def derivations(self):
        """The diagonal maps ``basis diag(weights[:, d]) basis^T`` the blocks came from."""
        out = []
        for d in range(self.weights.shape[1]):
            diag = np.repeat(self.weights[:, d], self.block_sizes)
            out.append(self.basis @ np.diag(diag) @ self.basis.T)
        return out

    def symmetric_generators(self):
        """Trace-orthonormal basis of the symmetric matrices preserving every block."""
        out = []
        for sl in self.slices:
            cols = self.basis[:, sl]
            out.extend(cols @ s @ cols.T for s in symmetric_basis(cols.shape[1]))
        return out

    def algebra_basis(self):
        """Basis of the block subalgebra (all of gl of each block), in ambient coordinates."""
        out = []
        for sl in self.slices:
            cols = self.basis[:, sl]
            out.extend(cols @ e @ cols.T for e in matrix_unit_basis(cols.shape[1]))
        return out

    def weight_index(self, weight, tol=GAP_TOL):
        """Index of the block with this weight vector, or None."""
        scale = max(1.0, float(np.max(np.abs(self.weights))))
        hits = np.all(np.abs(self.weights - weight) <= tol * scale, axis=1)
        idx = np.flatnonzero(hits)
        return int(idx[0]) if idx.size else None


def _group_values(vals, gap_tol):
    """Split sorted ``vals`` into runs whose consecutive gaps are at most ``gap_tol``."""
    groups = [[0]]
    for q in range(1, len(vals)):
        if vals[q] - vals[q - 1] <= gap_tol:
            groups[-1].append(q)
        else:
            groups.append([q])
    return groups


def eigenspace_blocks(d, gap_tol=GAP_TOL):
    """Eigenspace decomposition of a symmetric ``d``, merging eigenvalues closer than ``gap_tol``."""
    return common_blocks([d], gap_tol)


def common_blocks(derivations, gap_tol=GAP_TOL, commutator_tol=COMMUTATOR_TOL):
    """Joint eigenspaces of commuting symmetric maps.

    Each map refines the blocks of the previous ones. Raises
    :class:`NonCommutingDerivations` when some pair fails to commute.
    """
    mats = [np.asarray(d, dtype=float) for d in derivations]
    if not mats:
        raise ValueError("at least one derivation is required")
    n = mats[0].shape[0]
    for d in mats:
        if d.shape != (n, n):
            raise ValueError(f"derivation has shape {d.shape}, expected ({n}, {n})")
        if np.max(np.abs(d - d.T)) > 1e-12 * max(1.0, float(np.max(np.abs(d)))):
            raise ValueError("derivations must be symmetric")
    mats = [0.5 * (d + d.T) for d in mats]
    for a in range(len(mats)):
        for b in range(a + 1, len(mats)):
            comm = mats[a] @ mats[b] - mats[b] @ mats[a]
            bound = commutator_tol * max(np.linalg.norm(mats[a]) * np.linalg.norm(mats[b]), 1e-300)
            if np.linalg.norm(comm) > bound:
                raise NonCommutingDerivations(
                    f"derivations {a} and {b} do not commute: |[Da, Db]| = {np.linalg.norm(comm):.3e}")

    # each block is (columns, weight vector so far)
    blocks = [(np.eye(n), ())]
    for d in mats:
        refined = []
        for cols, weight in blocks:
            vals, vecs = np.linalg.eigh(cols.T @ d @ cols)
            for group in _group_values(vals, gap_tol):
                sub, _ = np.linalg.qr(cols @ vecs[:, group])
                refined.append((sub, weight + (float(np.mean(vals[group])),)))
        blocks = refined
    blocks.sort(key=lambda b: b[1])
    basis = np.concatenate([b[0] for b in blocks], axis=1)
    weights = np.array([b[1] for b in blocks])
    sizes = tuple(b[0].shape[1] for b in blocks)
    return BlockStructure(n, weights, basis, sizes)


# -- the subspace W ------------------------------------------------------------------

def _coordinate_brackets(n):
    """Orthonormal basis of V: ``(e_ij^k - e_ji^k)/sqrt(2)`` for i < j."""
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                c = np.zeros((n, n, n))
                c[i, j, k] = np.sqrt(0.5)
                c[j, i, k] = -np.sqrt(0.5)
                out.append(c)
    return out


def in_W(lam, d, tol=CHECK_TOL):
    """Whether ``|D.lam| <= tol |D| |lam|``."""
    d = np.asarray(d, dtype=float)
    bound = tol * np.linalg.norm(d) * lam.norm()
    return float(np.linalg.norm(kernels.act_coeffs(d, lam.coeffs))) <= bound


def w_basis(derivations, rtol=RANK_RTOL):
    """Orthonormal basis of the common kernel of ``lam -> D.lam`` over the given maps."""
    mats = [np.asarray(d, dtype=float) for d in derivations]
    n = mats[0].shape[0]
    coords = _coordinate_brackets(n)
    system = np.concatenate(
        [np.stack([kernels.act_coeffs(d, c).ravel() for c in coords], axis=1) for d in mats], axis=0)
    kernel = null_space(system, rtol)
    return [BracketTensor(np.tensordot(kernel[:, r], np.stack(coords), axes=1))
            for r in range(kernel.shape[1])]


def sample_W(derivations, count, rng):
    """``count`` Gaussian combinations of :func:`w_basis`; an empty list if W = 0."""
    basis = w_basis(derivations)
    if not basis:
        return []
    stacked = np.stack([b.coeffs for b in basis])
    return [BracketTensor(np.tensordot(rng.standard_normal(len(basis)), stacked, axes=1))
            for _ in range(count)]


def random_graded_scenario(n, rng, max_weight=3, attempts=100):
    """Random symmetric map with small positive integer eigenvalues and a nonzero W.

    Returns ``(D, W basis)``. The eigenbasis is a random rotation.
    """
    for _ in range(attempts):
        vals = np.sort(rng.integers(1, max_weight + 1, size=n)).astype(float)
        q, r = np.linalg.qr(rng.standard_normal((n, n)))
        q = q * np.sign(np.diag(r))
        d = q @ np.diag(vals) @ q.T
        d = 0.5 * (d + d.T)
        basis = w_basis([d])
        if basis:
            return d, basis
    raise RuntimeError("no scenario with a nonzero compatible subspace found")


def _in_block_coords(lam, blocks):
    p = blocks.basis
    return kernels.group_act_coeffs(np.ascontiguousarray(p.T), np.ascontiguousarray(p), lam.coeffs)


def graded_bracket_check(lam, blocks, tol=CHECK_TOL):
    """Whether ``lam(V_a, V_b)`` lies in ``V_{a+b}`` (zero when no such block) for all a, b.

    The out-of-block component is compared against ``tol |lam|``.
    """
    nrm = lam.norm()
    if nrm == 0.0:
        return True
    c = _in_block_coords(lam, blocks)
    slices = blocks.slices
    for a, sa in enumerate(slices):
        for b, sb in enumerate(slices):
            target = blocks.weight_index(blocks.weights[a] + blocks.weights[b])
            part = c[sa, sb, :].copy()
            if target is not None:
                part[:, :, slices[target]] = 0.0
            if np.linalg.norm(part) > tol * nrm:
                return False
    return True


def off_block_max(m, blocks):
    """Largest entry of ``basis^T m basis`` outside the diagonal blocks."""
    mb = blocks.basis.T @ m @ blocks.basis
    mask = np.ones_like(mb, dtype=bool)
    for sl in blocks.slices:
        mask[sl, sl] = False
    return float(np.max(np.abs(mb[mask]))) if mask.any() else 0.0


def check_detection(lam, blocks, tol=CHECK_TOL):
    """Whether ``m(lam)`` is block diagonal, entrywise within ``tol |m(lam)|``."""
    m = moment_bracket(lam)
    nrm = np.linalg.norm(m)
    if nrm == 0.0:
        return True
    return off_block_max(m, blocks) <= tol * nrm


# -- sums of ideals -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SumSplit:
    """``R^n = V_1 + V_2`` with ``V_1`` spanned by the first ``dim_1`` columns of ``basis``."""

    dim_1: int
    dim_2: int
    basis: np.ndarray = None

    def __post_init__(self):
        if self.dim_1 < 1 or self.dim_2 < 1:
            raise ValueError("both summands need positive dimension")
        n = self.dim_1 + self.dim_2
        p = np.eye(n) if self.basis is None else np.asarray(self.basis, dtype=float)
        if p.shape != (n, n):
            raise ValueError(f"split basis must be {n}x{n}")
        if np.max(np.abs(p.T @ p - np.eye(n))) > 1e-10:
            raise ValueError("split basis must be orthogonal")
        object.__setattr__(self, "basis", p)

    @property
    def dim(self):
        return self.dim_1 + self.dim_2

    def as_blocks(self):
        """The two summands as blocks (the weights are labels only)."""
        weights = np.array([[0.0], [1.0]])
        return BlockStructure(self.dim, weights, self.basis, (self.dim_1, self.dim_2))


def _check_split_dim(lam, split):
    if lam.dim != split.dim:
        raise ValueError(f"bracket has dimension {lam.dim} but the split covers {split.dim}")


def _split_defects(c, n1):
    return {
        "mu(V1,V1) outside V1": float(np.linalg.norm(c[:n1, :n1, n1:])),
        "mu(V2,V2) outside V2": float(np.linalg.norm(c[n1:, n1:, :n1])),
        "mu(V1,V2)": float(np.linalg.norm(c[:n1, n1:, :])),
    }


def _split_coords(lam, split):
    p = split.basis
    return kernels.group_act_coeffs(np.ascontiguousarray(p.T), np.ascontiguousarray(p), lam.coeffs)


def split_direct_sum(mu, split, tol=CHECK_TOL):
    """The two restricted brackets, after checking both summands are ideals.

    Defects are compared against ``tol |mu|``; the first one over the bound is
    reported in :class:`NotAnIdealSum`.
    """
    _check_split_dim(mu, split)
    c = _split_coords(mu, split)
    n1 = split.dim_1
    for name, value in _split_defects(c, n1).items():
        if value > tol * mu.norm():
            raise NotAnIdealSum(name, value)
    return BracketTensor(c[:n1, :n1, :n1]), BracketTensor(c[n1:, n1:, n1:])


def sum_w_basis(split):
    """Orthonormal basis of the brackets that are sums of brackets on ``V_1`` and ``V_2``."""
    n1, n = split.dim_1, split.dim
    p = np.ascontiguousarray(split.basis)
    out = []
    for c in _coordinate_brackets(n):
        idx = np.argwhere(c > 0)[0]
        if len({int(x) < n1 for x in idx}) == 1:
            out.append(BracketTensor(kernels.group_act_coeffs(p, np.ascontiguousarray(p.T), c)))
    return out


def in_sum_W(lam, split, tol=CHECK_TOL):
    c = _split_coords(lam, split)
    return all(v <= tol * lam.norm() for v in _split_defects(c, split.dim_1).values())


def check_sum_detection(lam, split, tol=CHECK_TOL):
    """Whether ``m(lam)`` has no ``V_1``-``V_2`` block; ``lam`` must be a sum of brackets on the summands."""
    _check_split_dim(lam, split)
    if not in_sum_W(lam, split, tol):
        raise NotInW("bracket is not a sum of brackets on the two summands")
    return check_detection(lam, split.as_blocks(), tol)


# -- tangent spaces ------------------------------------------------------------------

def _span_dim(vectors):
    if not vectors:
        return 0
    return numerical_rank(np.stack([v.ravel() for v in vectors], axis=1), RANK_RTOL)


def tangent_intersection_rank(mu, structure, tol=CHECK_TOL):
    """``(dim T(G.mu) n W, dim T(H.mu))`` for H the block group of ``structure``.

    ``structure`` is a :class:`BlockStructure` or a :class:`SumSplit`. The
    intersection dimension comes from ``dim A + dim B - dim(A + B)`` on
    orthonormal bases.
    """
    if isinstance(structure, SumSplit):
        blocks = structure.as_blocks()
        member = in_sum_W(mu, structure, tol)
        wb = sum_w_basis(structure)
    else:
        blocks = structure
        derivs = blocks.derivations()
        member = all(in_W(mu, d, tol) for d in derivs)
        wb = w_basis(derivs) if member else []
    if not member:
        raise NotInW("bracket is not in the compatible subspace")
    n = mu.dim
    if mu.is_zero():
        return 0, 0
    c = mu.normalized().coeffs
    tg = [kernels.act_coeffs(e, c) for e in matrix_unit_basis(n)]
    th = [kernels.act_coeffs(np.ascontiguousarray(e), c) for e in blocks.algebra_basis()]
    ug = range_basis(np.stack([v.ravel() for v in tg], axis=1), RANK_RTOL)
    if wb:
        uw = np.stack([w.coeffs.ravel() for w in wb], axis=1)
        joint = numerical_rank(np.concatenate([ug, uw], axis=1), rtol=0.0, atol=RANK_RTOL)
        inter = ug.shape[1] + uw.shape[1] - joint
    else:
        inter = 0
    return int(inter), _span_dim(th)
