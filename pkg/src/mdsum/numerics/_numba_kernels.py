"""Loop-form kernels, compiled with numba when it is importable.

Each function here has a vectorized twin in ``_numpy_kernels`` with the same
signature and return convention; ``kernels`` picks one set at import time.
"""
import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is an optional accelerator
    njit = None

PIVOT_TOL = 1e-12


def _jit(fn):
    if njit is None:
        return fn
    return njit(cache=True, nogil=True)(fn)


@_jit
def lu_factor(a):
    """Doolittle LU with partial pivoting. Returns (lu, perm, ok) with a[perm] = L @ U."""
    n = a.shape[0]
    lu = a.copy()
    perm = np.arange(n)
    for k in range(n):
        p = k
        best = abs(lu[k, k])
        for i in range(k + 1, n):
            v = abs(lu[i, k])
            if v > best:
                best = v
                p = i
        if best < PIVOT_TOL:
            return lu, perm, False
        if p != k:
            for j in range(n):
                tmp = lu[k, j]
                lu[k, j] = lu[p, j]
                lu[p, j] = tmp
            t = perm[k]
            perm[k] = perm[p]
            perm[p] = t
        pivot = lu[k, k]
        for i in range(k + 1, n):
            m = lu[i, k] / pivot
            lu[i, k] = m
            for j in range(k + 1, n):
                lu[i, j] -= m * lu[k, j]
    return lu, perm, True


@_jit
def lu_solve(lu, perm, b, trans):
    n = lu.shape[0]
    x = np.empty(n)
    if not trans:
        for i in range(n):
            s = b[perm[i]]
            for j in range(i):
                s -= lu[i, j] * x[j]
            x[i] = s
        for i in range(n - 1, -1, -1):
            s = x[i]
            for j in range(i + 1, n):
                s -= lu[i, j] * x[j]
            x[i] = s / lu[i, i]
        return x
    # A^T x = b  <=>  U^T L^T (P x) = b
    z = np.empty(n)
    for i in range(n):
        s = b[i]
        for j in range(i):
            s -= lu[j, i] * z[j]
        z[i] = s / lu[i, i]
    for i in range(n - 1, -1, -1):
        s = z[i]
        for j in range(i + 1, n):
            s -= lu[j, i] * z[j]
        z[i] = s
    for i in range(n):
        x[perm[i]] = z[i]
    return x


@_jit
def levenshtein(a, b):
    n = a.shape[0]
    m = b.shape[0]
    prev = np.arange(m + 1)
    cur = np.empty(m + 1, dtype=prev.dtype)
    for i in range(1, n + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            dele = prev[j] + 1
            ins = cur[j - 1] + 1
            best = sub
            if dele < best:
                best = dele
            if ins < best:
                best = ins
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]


@_jit
def levenshtein_many(a, flat, offsets):
    """Distances from ``a`` to each of the sequences flat[offsets[i]:offsets[i+1]]."""
    k = offsets.shape[0] - 1
    out = np.empty(k, dtype=np.int64)
    for i in range(k):
        out[i] = levenshtein(a, flat[offsets[i]:offsets[i + 1]])
    return out


@_jit
def power_iterate(m, y, lam, tol, max_iter):
    """Iterate f <- (1-lam) y + lam M f from f = y. Returns (f, iterations)."""
    n = y.shape[0]
    f = y.copy()
    nxt = np.empty(n)
    for it in range(max_iter):
        delta = 0.0
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += m[i, j] * f[j]
            v = (1.0 - lam) * y[i] + lam * s
            d = abs(v - f[i])
            if d > delta:
                delta = d
            nxt[i] = v
        f, nxt = nxt, f
        if delta < tol:
            return f, it + 1
    return f, max_iter
