"""Kendall row-wise rank correlation between two similarity matrices.

For every row ``i`` the off-diagonal entries of both matrices are compared
pairwise; the statistic is::

    CORR = sum sign(X_ij - X_ik) sign(Y_ij - Y_ik)
           / sqrt(sum sign(X_ij - X_ik)^2 * sum sign(Y_ij - Y_ik)^2)

over ``j < k`` with ``j, k != i``. Equal values give sign 0 (exact
comparison, no epsilon).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .similarity import SimilarityMatrix


@dataclass(frozen=True)
class RowwiseCorr:
    value: float
    numerator: int
    denom_x: int
    denom_y: int

    @property
    def defined(self) -> bool:
        return self.denom_x > 0 and self.denom_y > 0

    @classmethod
    def from_counts(cls, num, dx, dy) -> "RowwiseCorr":
        num, dx, dy = int(num), int(dx), int(dy)
        value = num / math.sqrt(dx * dy) if dx > 0 and dy > 0 else 0.0
        return cls(value, num, dx, dy)


def corr_value(num: int, dx: int, dy: int) -> float:
    return num / math.sqrt(dx * dy) if dx > 0 and dy > 0 else 0.0


def midrank(values, descending: bool = True) -> np.ndarray:
    """Ranks with ties sharing the mean of their ordinal positions.

    With ``descending=True`` the largest value gets rank 1, as in a row of a
    similarity matrix where the most similar project comes first.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("midrank needs at least one value")
    key = -v if descending else v
    order = np.argsort(key, kind="mergesort")
    ranks = np.empty(v.size)
    sorted_key = key[order]
    start = 0
    for end in range(1, v.size + 1):
        if end == v.size or sorted_key[end] != sorted_key[start]:
            # ordinal positions start+1 .. end
            ranks[order[start:end]] = (start + 1 + end) / 2.0
            start = end
    return ranks


def _as_array(m) -> np.ndarray:
    return np.ascontiguousarray(m.values if isinstance(m, SimilarityMatrix) else m, dtype=float)


def rowwise_kendall(smx, smy) -> RowwiseCorr:
    """Row-wise Kendall correlation of two square matrices (diagonals ignored)."""
    X, Y = _as_array(smx), _as_array(smy)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape != Y.shape:
        raise ValueError(f"need two square matrices of equal size, got {X.shape} and {Y.shape}")
    if X.shape[0] < 3:
        raise ValueError("row-wise correlation needs at least 3 projects")
    return RowwiseCorr.from_counts(*_kernels.matrix_counts(X, Y))


def row_kendall(row_x, row_y) -> RowwiseCorr:
    """Single-row version; rows must already exclude the diagonal element."""
    x = np.ascontiguousarray(row_x, dtype=float)
    y = np.ascontiguousarray(row_y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"row lengths differ: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ValueError("rows need at least two elements")
    return RowwiseCorr.from_counts(*_kernels.row_counts(x, y))


def off_diagonal_row(m, i: int) -> np.ndarray:
    a = _as_array(m)
    return np.delete(a[i], i)


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def rowwise_kendall_reference(smx, smy) -> RowwiseCorr:
    """Literal triple loop over (i, j < k); the test oracle for the fast path."""
    X, Y = _as_array(smx).tolist(), _as_array(smy).tolist()
    n = len(X)
    if n != len(Y):
        raise ValueError("dimension mismatch")
    num = dx = dy = 0
    for i in range(n):
        for j in range(n):
            for k in range(j + 1, n):
                if i == j or i == k:
                    continue
                sx = _sign(X[i][j] - X[i][k])
                sy = _sign(Y[i][j] - Y[i][k])
                num += sx * sy
                dx += sx * sx
                dy += sy * sy
    return RowwiseCorr.from_counts(num, dx, dy)


def row_kendall_reference(row_x, row_y) -> RowwiseCorr:
    x, y = list(map(float, row_x)), list(map(float, row_y))
    num = dx = dy = 0
    for j in range(len(x)):
        for k in range(j + 1, len(x)):
            sx, sy = _sign(x[j] - x[k]), _sign(y[j] - y[k])
            num += sx * sy
            dx += sx * sx
            dy += sy * sy
    return RowwiseCorr.from_counts(num, dx, dy)
