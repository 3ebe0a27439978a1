"""Accuracy measures for effort predictions (stored as fractions, PRED(25) as a percentage)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class MetricSummary:
    mmre: float
    mdmre: float
    pred25: float
    n: int
    mre_vector: tuple[float, ...] = field(repr=False)


def mre(actual: float, estimated: float) -> float:
    if not actual > 0:
        raise ValueError(f"actual effort must be positive, got {actual}")
    return abs(actual - estimated) / actual


def mre_vector(actual, estimated) -> np.ndarray:
    actual = np.asarray(actual, dtype=float)
    if np.any(actual <= 0):
        raise ValueError("actual effort must be positive")
    return np.abs(actual - np.asarray(estimated, dtype=float)) / actual


def summarize(mres) -> MetricSummary:
    """MMRE, MdMRE and PRED(25); an MRE of exactly 0.25 counts as a hit."""
    v = np.asarray(mres, dtype=float)
    if v.size == 0:
        raise ValueError("cannot summarize an empty MRE vector")
    return MetricSummary(
        mmre=float(np.mean(v)),
        mdmre=float(np.median(v)),
        pred25=100.0 * np.count_nonzero(v <= 0.25) / v.size,
        n=int(v.size),
        mre_vector=tuple(float(x) for x in v),
    )
