"""SVD-threshold helpers shared by the rank and null-space computations."""
import numpy as np


def null_space(mat, rtol=1e-9):
    """Orthonormal basis (as columns) of the numerical kernel of ``mat``.

    Singular values at or below ``rtol * sigma_max`` count as zero. A zero
    matrix has the whole domain as kernel.
    """
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    ncols = mat.shape[1]
    if mat.size == 0 or not np.any(mat):
        return np.eye(ncols)
    _, sv, vt = np.linalg.svd(mat, full_matrices=True)
    cut = rtol * sv[0]
    rank = int(np.sum(sv > cut))
    return vt[rank:].T.copy()


def numerical_rank(mat, rtol=1e-9, atol=0.0):
    """Number of singular values above ``max(rtol * sigma_max, atol)``."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.size == 0:
        return 0
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > max(rtol * sv[0], atol)))


def range_basis(mat, rtol=1e-9, atol=0.0):
    """Orthonormal basis (as columns) of the numerical column space of ``mat``."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.size == 0:
        return np.zeros((mat.shape[0], 0))
    u, sv, _ = np.linalg.svd(mat, full_matrices=False)
    if sv[0] == 0.0:
        return np.zeros((mat.shape[0], 0))
    rank = int(np.sum(sv > max(rtol * sv[0], atol)))
    return u[:, :rank].copy()


def orthonormalize(mats, rtol=1e-9):
    """Trace-orthonormal basis of span(mats), dropping dependent directions."""
    mats = [np.asarray(m, dtype=float) for m in mats]
    if not mats:
        return []
    shape = mats[0].shape
    cols = range_basis(np.stack([m.ravel() for m in mats], axis=1), rtol)
    return [cols[:, q].reshape(shape) for q in range(cols.shape[1])]
