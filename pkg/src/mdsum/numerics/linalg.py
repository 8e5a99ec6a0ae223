"""Dense linear algebra and activations on float64 arrays."""
from __future__ import annotations

import numpy as np

from ..errors import ContractError, SingularMatrixError
from . import kernels

STOCHASTIC_TOL = 1e-9


class LUFactorization:
    """Partial-pivoting LU of a square matrix, reusable for A x = b and A^T x = b."""

    def __init__(self, a):
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ContractError(f"expected a square matrix, got shape {a.shape}")
        lu, perm, ok = kernels.lu_factor(np.ascontiguousarray(a))
        if not ok:
            raise SingularMatrixError("matrix is singular (pivot magnitude below 1e-12)")
        self.lu = lu
        self.perm = perm

    @property
    def n(self):
        return self.lu.shape[0]

    def solve(self, b, trans=False):
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (self.n,):
            raise ContractError(f"right-hand side has shape {b.shape}, expected ({self.n},)")
        return kernels.lu_solve(self.lu, self.perm, np.ascontiguousarray(b), bool(trans))


def solve_linear_system(a, b):
    """Solve ``a @ x = b`` by LU decomposition with partial pivoting."""
    return LUFactorization(a).solve(b)


def pagerank_power_iteration(m, y, lam, tol=1e-10, max_iter=100_000):
    """Fixed point of f = (1 - lam) y + lam M f by plain iteration from f = y.

    ``m`` must be column-stochastic and ``y`` a probability vector. Stops when
    the max-norm change between iterates drops below ``tol``.
    """
    m = np.asarray(m, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if m.shape != (n, n):
        raise ContractError(f"transition matrix shape {m.shape} does not match vector length {n}")
    if n and np.max(np.abs(m.sum(axis=0) - 1.0)) > STOCHASTIC_TOL:
        raise ContractError("transition matrix is not column-stochastic")
    if np.any(y < 0) or (n and abs(y.sum() - 1.0) > STOCHASTIC_TOL):
        raise ContractError("teleport vector must be non-negative and sum to 1")
    if not 0.0 <= lam < 1.0:
        raise ContractError(f"damping must lie in [0, 1), got {lam}")
    f, _ = kernels.power_iterate(np.ascontiguousarray(m), np.ascontiguousarray(y), float(lam), float(tol), int(max_iter))
    return f


def column_normalize(w):
    """Divide each column by its sum; all-zero columns become uniform (dangling nodes)."""
    w = np.asarray(w, dtype=np.float64)
    n = w.shape[0]
    sums = w.sum(axis=0)
    out = np.empty_like(w)
    nz = sums > 0
    out[:, nz] = w[:, nz] / sums[nz]
    out[:, ~nz] = 1.0 / n if n else 0.0
    return out


def softmax(v):
    v = np.asarray(v, dtype=np.float64)
    e = np.exp(v - np.max(v))
    return e / e.sum()


def log_softmax(v):
    v = np.asarray(v, dtype=np.float64)
    shifted = v - np.max(v)
    return shifted - np.log(np.exp(shifted).sum())


def sigmoid(x):
    # split by sign so exp never overflows
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out
