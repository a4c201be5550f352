"""Slow reference implementations written directly from the definitions.

Nothing here calls the package's kernels; brackets are evaluated entry by
entry from the structure constants.
"""
import itertools

import numpy as np


def bracket(c, x, y):
    n = c.shape[0]
    out = np.zeros(n)
    for i, j, k in itertools.product(range(n), repeat=3):
        out[k] += x[i] * y[j] * c[i, j, k]
    return out


def basis_vector(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


def ad_matrix(c, i):
    """Matrix of y -> mu(e_i, y)."""
    n = c.shape[0]
    return np.column_stack([bracket(c, basis_vector(n, i), basis_vector(n, j)) for j in range(n)])


def moment(c):
    n = c.shape[0]
    m = np.zeros((n, n))
    for i in range(n):
        ad = ad_matrix(c, i)
        m += -4.0 * ad.T @ ad + 2.0 * ad @ ad.T
    return m


def act(a, c):
    """(A.mu)(e_i, e_j) = A mu(e_i, e_j) - mu(A e_i, e_j) - mu(e_i, A e_j)."""
    n = c.shape[0]
    out = np.zeros_like(c)
    for i, j in itertools.product(range(n), repeat=2):
        ei, ej = basis_vector(n, i), basis_vector(n, j)
        out[i, j] = a @ bracket(c, ei, ej) - bracket(c, a @ ei, ej) - bracket(c, ei, a @ ej)
    return out


def group_act(g, c):
    n = c.shape[0]
    gi = np.linalg.inv(g)
    out = np.zeros_like(c)
    for i, j in itertools.product(range(n), repeat=2):
        out[i, j] = g @ bracket(c, gi[:, i], gi[:, j])
    return out


def jacobi_residual(c):
    n = c.shape[0]
    worst = 0.0
    for i, j, k in itertools.product(range(n), repeat=3):
        ei, ej, ek = (basis_vector(n, q) for q in (i, j, k))
        jac = (bracket(c, bracket(c, ei, ej), ek) + bracket(c, bracket(c, ej, ek), ei)
               + bracket(c, bracket(c, ek, ei), ej))
        worst = max(worst, float(np.linalg.norm(jac)))
    return worst


def inner(c1, c2):
    return float(sum(c1[idx] * c2[idx] for idx in np.ndindex(c1.shape)))


def symmetric_derivation_dim(c):
    """Null-space dimension of A -> A.mu over symmetric A, from a hand-assembled system."""
    n = c.shape[0]
    cols = []
    for a, b in itertools.combinations_with_replacement(range(n), 2):
        e = np.zeros((n, n))
        e[a, b] = e[b, a] = 1.0
        cols.append(act(e, c).ravel())
    sv = np.linalg.svd(np.array(cols).T, compute_uv=False)
    return len(cols) - int(np.sum(sv > 1e-9 * sv[0]))


def power_rank_partition(x, tol=1e-7):
    """Jordan type from ranks of powers via numpy.linalg.matrix_rank."""
    n = x.shape[0]
    ranks = [n] + [int(np.linalg.matrix_rank(np.linalg.matrix_power(x, k), tol=tol * max(1.0, np.linalg.norm(x, 2)) ** k))
                   for k in range(1, n + 2)]
    parts = []
    for k in range(n, 0, -1):
        parts += [k] * ((ranks[k - 1] - ranks[k]) - (ranks[k] - ranks[k + 1]))
    return tuple(parts)


def partition_count(n):
    """Partition numbers by Euler's pentagonal recurrence."""
    p = [1] + [0] * n
    for m in range(1, n + 1):
        k, total = 1, 0
        while True:
            g1 = k * (3 * k - 1) // 2
            g2 = k * (3 * k + 1) // 2
            if g1 > m:
                break
            sign = 1 if k % 2 else -1
            total += sign * p[m - g1]
            if g2 <= m:
                total += sign * p[m - g2]
            k += 1
        p[m] = total
    return p[n]
