"""Compiled kernels for sign-concordance counting.

Counts follow Knight's algorithm: sort by (x, y), count strict inversions of
y with a merge sort, and recover the concordance sum from the tie counts.
Every count is an exact integer.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _tie_pairs_sorted(v):
    total = 0
    run = 1
    for t in range(1, v.shape[0]):
        if v[t] == v[t - 1]:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    total += run * (run - 1) // 2
    return total


@njit(cache=True, nogil=True)
def _count_inversions(y, buf):
    """Strict inversions (y[a] > y[b], a < b); sorts ``y`` in place."""
    n = y.shape[0]
    inv = 0
    width = 1
    src = y
    dst = buf
    in_y = True
    while width < n:
        lo = 0
        while lo < n:
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i = lo
            j = mid
            k = lo
            while i < mid and j < hi:
                if src[j] < src[i]:
                    dst[k] = src[j]
                    inv += mid - i
                    j += 1
                else:
                    dst[k] = src[i]
                    i += 1
                k += 1
            while i < mid:
                dst[k] = src[i]
                i += 1
                k += 1
            while j < hi:
                dst[k] = src[j]
                j += 1
                k += 1
            lo += 2 * width
        tmp = src
        src = dst
        dst = tmp
        in_y = not in_y
        width *= 2
    if not in_y:
        y[:] = src
    return inv


@njit(cache=True, nogil=True)
def row_counts(x, y):
    """(numerator, denom_x, denom_y) of the pairwise sign sums for two vectors."""
    n = x.shape[0]
    if n < 2:
        return 0, 0, 0
    total = n * (n - 1) // 2
    order = np.argsort(y, kind="mergesort")
    xs = x[order]
    ys = y[order]
    order2 = np.argsort(xs, kind="mergesort")
    xs = xs[order2]
    ys = ys[order2]

    x_ties = _tie_pairs_sorted(xs)
    joint = 0
    run = 1
    for t in range(1, n):
        if xs[t] == xs[t - 1] and ys[t] == ys[t - 1]:
            run += 1
        else:
            joint += run * (run - 1) // 2
            run = 1
    joint += run * (run - 1) // 2

    buf = np.empty_like(ys)
    work = ys.copy()
    dis = _count_inversions(work, buf)
    # work is now sorted
    y_ties = _tie_pairs_sorted(work)
    num = total - x_ties - y_ties + joint - 2 * dis
    return num, total - x_ties, total - y_ties


@njit(cache=True, nogil=True)
def matrix_counts(X, Y):
    """Row-wise sums of :func:`row_counts` over diagonal-deleted rows."""
    n = X.shape[0]
    num = 0
    dx = 0
    dy = 0
    rx = np.empty(n - 1)
    ry = np.empty(n - 1)
    for i in range(n):
        k = 0
        for j in range(n):
            if j != i:
                rx[k] = X[i, j]
                ry[k] = Y[i, j]
                k += 1
        a, b, c = row_counts(rx, ry)
        num += a
        dx += b
        dy += c
    return num, dx, dy


@njit(cache=True, nogil=True)
def permuted_matrix_numerators(X, Y, perms):
    """Numerators of X against Y with rows and columns permuted by each row of ``perms``."""
    n = X.shape[0]
    out = np.empty(perms.shape[0], dtype=np.int64)
    Yp = np.empty((n, n))
    for r in range(perms.shape[0]):
        p = perms[r]
        for i in range(n):
            for j in range(n):
                Yp[i, j] = Y[p[i], p[j]]
        num, _, _ = matrix_counts(X, Yp)
        out[r] = num
    return out


@njit(cache=True, nogil=True)
def permuted_row_numerators(x, y, perms):
    out = np.empty(perms.shape[0], dtype=np.int64)
    yp = np.empty(y.shape[0])
    for r in range(perms.shape[0]):
        p = perms[r]
        for j in range(y.shape[0]):
            yp[j] = y[p[j]]
        num, _, _ = row_counts(x, yp)
        out[r] = num
    return out
