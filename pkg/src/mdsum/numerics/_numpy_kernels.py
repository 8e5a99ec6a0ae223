"""Vectorized numpy versions of the loop kernels; same signatures and results."""
import numpy as np

PIVOT_TOL = 1e-12


def lu_factor(a):
    n = a.shape[0]
    lu = np.array(a, dtype=np.float64, copy=True)
    perm = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) < PIVOT_TOL:
            return lu, perm, False
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, perm, True


def lu_solve(lu, perm, b, trans):
    n = lu.shape[0]
    if not trans:
        x = b[perm].astype(np.float64)
        for i in range(1, n):
            x[i] -= lu[i, :i] @ x[:i]
        for i in range(n - 1, -1, -1):
            x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
        return x
    z = np.array(b, dtype=np.float64, copy=True)
    for i in range(n):
        z[i] = (z[i] - lu[:i, i] @ z[:i]) / lu[i, i]
    for i in range(n - 2, -1, -1):
        z[i] -= lu[i + 1:, i] @ z[i + 1:]
    x = np.empty(n)
    x[perm] = z
    return x


def levenshtein(a, b):
    n, m = a.shape[0], b.shape[0]
    if n == 0 or m == 0:
        return max(n, m)
    cols = np.arange(m + 1)
    prev = cols.copy()
    row = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        row[0] = i
        np.minimum(prev[1:] + 1, prev[:-1] + (b != a[i - 1]), out=row[1:])
        # insertion chain: cur[j] = min_k<=j row[k] + (j - k)
        prev = np.minimum.accumulate(row - cols) + cols
    return int(prev[m])


def levenshtein_many(a, flat, offsets):
    return np.array(
        [levenshtein(a, flat[offsets[i]:offsets[i + 1]]) for i in range(len(offsets) - 1)],
        dtype=np.int64,
    )


def power_iterate(m, y, lam, tol, max_iter):
    f = np.array(y, dtype=np.float64, copy=True)
    for it in range(max_iter):
        nxt = (1.0 - lam) * y + lam * (m @ f)
        delta = np.max(np.abs(nxt - f)) if f.size else 0.0
        f = nxt
        if delta < tol:
            return f, it + 1
    return f, max_iter
