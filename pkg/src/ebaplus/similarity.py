"""Pairwise distances between projects and the similarity matrices built on them."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset_io import AttributeKind, Dataset

EFFORT = "<effort>"


class DeltaMode(str, enum.Enum):
    """How a numeric attribute difference is scaled by its range.

    ``LITERAL`` divides the squared difference by the range, ``SQUARED``
    divides the difference by the range before squaring. For a single
    attribute the two differ by a constant factor, so rank statistics agree.
    """

    LITERAL = "literal"
    SQUARED = "squared"


@dataclass(frozen=True)
class SimilarityMatrix:
    values: np.ndarray
    attr_subset: tuple[str, ...]

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def to_csv(self, path: str | Path, project_ids: Sequence[str]) -> None:
        """Debug dump, six decimal places."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["", *project_ids])
            for pid, row in zip(project_ids, self.values):
                w.writerow([pid, *(f"{v:.6f}" for v in row)])


def feature_delta(a, b, kind: AttributeKind, range_: tuple[float, float] | None = None,
                  mode: DeltaMode = DeltaMode.LITERAL) -> float:
    if kind is AttributeKind.CATEGORICAL:
        return 0.0 if a == b else 1.0
    lo, hi = range_
    width = hi - lo
    if width == 0:
        return 0.0
    diff = float(a) - float(b)
    if DeltaMode(mode) is DeltaMode.LITERAL:
        return diff * diff / width
    return (diff / width) ** 2


def distance(pi: dict, pj: dict, attrs: Sequence[str], kinds: dict,
             ranges: dict, mode: DeltaMode = DeltaMode.LITERAL) -> float:
    """Mean-scaled Euclidean distance between two project rows.

    ``d = sqrt(sum(delta_k)) / m`` with ``m = len(attrs)``; ``ranges`` maps
    each numeric attribute to its (min, max) over the reference pool.
    """
    if not attrs:
        raise ValueError("distance needs at least one attribute")
    total = 0.0
    for a in attrs:
        if a not in pi or a not in pj:
            raise ValueError(f"attribute {a!r} missing from a project row")
        total += feature_delta(pi[a], pj[a], kinds[a], ranges.get(a), mode)
    return float(np.sqrt(total)) / len(attrs)


def _delta_block(x: np.ndarray, y: np.ndarray, kind: AttributeKind,
                 range_: tuple[float, float] | None, mode: DeltaMode) -> np.ndarray:
    """Vectorized feature_delta for every pair (x_i, y_j)."""
    if kind is AttributeKind.CATEGORICAL:
        return (x[:, None] != y[None, :]).astype(float)
    lo, hi = range_
    width = hi - lo
    if width == 0:
        return np.zeros((len(x), len(y)))
    diff = x.astype(float)[:, None] - y.astype(float)[None, :]
    if mode is DeltaMode.LITERAL:
        return diff * diff / width
    return (diff / width) ** 2


def _ranges(d: Dataset, attrs: Sequence[str]) -> dict:
    out = {}
    for a in attrs:
        if d.kinds[a] is AttributeKind.NUMERIC:
            col = np.asarray(d.columns[a], dtype=float)
            out[a] = (float(col.min()), float(col.max()))
    return out


def cross_distances(train: Dataset, targets: Dataset, attrs: Sequence[str],
                    mode: DeltaMode = DeltaMode.LITERAL,
                    ranges: dict | None = None) -> np.ndarray:
    """Distances from each target row to each training row, shape (t, n).

    Ranges default to those of ``train``.
    """
    if not attrs:
        raise ValueError("distance needs at least one attribute")
    mode = DeltaMode(mode)
    if ranges is None:
        ranges = _ranges(train, attrs)
    total = np.zeros((targets.n, train.n))
    for a in attrs:
        total += _delta_block(targets.columns[a], train.columns[a],
                              train.kinds[a], ranges.get(a), mode)
    return np.sqrt(total) / len(attrs)


def distance_matrix(d: Dataset, attrs: Sequence[str],
                    mode: DeltaMode = DeltaMode.LITERAL) -> np.ndarray:
    dist = cross_distances(d, d, attrs, mode)
    # exact symmetry and zero diagonal regardless of rounding
    dist = np.triu(dist, 1)
    return dist + dist.T


def _to_similarity(dist: np.ndarray) -> np.ndarray:
    top = dist.max() if dist.size else 0.0
    if top == 0:
        sim = np.ones_like(dist)
    else:
        sim = 1.0 - dist / top
    np.fill_diagonal(sim, 1.0)
    return sim


def similarity_matrix(d: Dataset, attrs: Sequence[str],
                      mode: DeltaMode = DeltaMode.LITERAL) -> SimilarityMatrix:
    """``1 - distance / max distance`` over ``attrs``; all-ones if every distance is 0."""
    attrs = tuple(attrs)
    return SimilarityMatrix(_to_similarity(distance_matrix(d, attrs, mode)), attrs)


def effort_distance_matrix(d: Dataset, mode: DeltaMode = DeltaMode.LITERAL) -> np.ndarray:
    e = np.asarray(d.effort, dtype=float)
    width = e.max() - e.min()
    if width == 0:
        return np.zeros((d.n, d.n))
    diff = e[:, None] - e[None, :]
    if DeltaMode(mode) is DeltaMode.LITERAL:
        delta = diff * diff / width
    else:
        delta = (diff / width) ** 2
    dist = np.triu(np.sqrt(delta), 1)
    return dist + dist.T


def effort_similarity_matrix(d: Dataset, mode: DeltaMode = DeltaMode.LITERAL) -> SimilarityMatrix:
    return SimilarityMatrix(_to_similarity(effort_distance_matrix(d, mode)), (EFFORT,))
