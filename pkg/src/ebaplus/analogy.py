"""Closest-analogy effort prediction and its validation harnesses."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset_io import Dataset
from .metrics import mre_vector, summarize
from .resampling import RngConfig
from .similarity import DeltaMode, cross_distances


class SubsetSearchTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Prediction:
    target_id: str
    analog_ids: tuple[str, ...]
    predicted_effort: float
    similarity: float


@dataclass(frozen=True)
class ProjectResult:
    id: str
    actual: float
    predicted: float
    mre: float

    @property
    def abs_residual(self) -> float:
        return abs(self.actual - self.predicted)


@dataclass(frozen=True)
class ValidationResult:
    records: tuple[ProjectResult, ...]
    mmre: float
    mdmre: float
    pred25: float
    method: str
    k: int | None = None
    seed: int | None = None

    @property
    def mre_vector(self) -> np.ndarray:
        return np.array([r.mre for r in self.records])

    def to_residual_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "actual", "predicted", "abs_residual"])
            for r in self.records:
                w.writerow([r.id, repr(r.actual), repr(r.predicted), repr(r.abs_residual)])


def read_residuals(path: str | Path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "abs_residual" not in rows[0]:
        raise ValueError(f"{path} has no abs_residual column")
    return np.array([float(r["abs_residual"]) for r in rows])


def _predict_from_distances(train: Dataset, dist: np.ndarray, target_id: str) -> Prediction:
    best = dist.min()
    tied = np.flatnonzero(dist == best)
    top = dist.max()
    sim = 1.0 if top == 0 else 1.0 - best / top
    return Prediction(
        target_id=target_id,
        analog_ids=tuple(train.project_ids[i] for i in tied),
        predicted_effort=float(np.mean(np.asarray(train.effort)[tied])),
        similarity=float(sim),
    )


def predict_closest(train: Dataset, target: Dataset, attrs: Sequence[str],
                    mode: DeltaMode = DeltaMode.LITERAL, index: int = 0) -> Prediction:
    """Effort of the closest training project to ``target`` row ``index``.

    Ranges come from the training pool only. Equally close analogues are
    averaged. ``similarity`` is ``1 - d_min / d_max`` over the target's
    distances to the pool.
    """
    if train.n == 0:
        raise ValueError("training set is empty")
    if not attrs:
        raise ValueError("need at least one attribute")
    absent = [a for a in attrs if a not in target.columns or a not in train.columns]
    if absent:
        raise ValueError(f"attributes missing: {absent}")
    one = target.subset([index])
    dist = cross_distances(train, one, attrs, mode)[0]
    return _predict_from_distances(train, dist, one.project_ids[0])


def _holdout_predictions(d: Dataset, folds: list[np.ndarray], attrs, mode) -> list[Prediction]:
    preds: dict[int, Prediction] = {}
    everyone = np.arange(d.n)
    for test_idx in folds:
        train = d.subset(np.setdiff1d(everyone, test_idx))
        test = d.subset(test_idx)
        dist = cross_distances(train, test, attrs, mode)
        for row, i in enumerate(test_idx):
            preds[int(i)] = _predict_from_distances(train, dist[row], d.project_ids[i])
    return [preds[i] for i in range(d.n)]


def _result(d: Dataset, preds: list[Prediction], method: str, **extra) -> ValidationResult:
    actual = np.asarray(d.effort, dtype=float)
    predicted = np.array([p.predicted_effort for p in preds])
    mres = mre_vector(actual, predicted)
    s = summarize(mres)
    records = tuple(
        ProjectResult(pid, float(a), float(p), float(m))
        for pid, a, p, m in zip(d.project_ids, actual, predicted, mres)
    )
    return ValidationResult(records, s.mmre, s.mdmre, s.pred25, method, **extra)


def jackknife_validate(d: Dataset, attrs: Sequence[str],
                       mode: DeltaMode = DeltaMode.LITERAL) -> ValidationResult:
    """Leave-one-out: every project predicted from all the others."""
    if d.n < 3:
        raise ValueError("jackknife validation needs at least 3 projects")
    folds = [np.array([i]) for i in range(d.n)]
    return _result(d, _holdout_predictions(d, folds, list(attrs), mode), "jackknife")


def kfold_assignment(n: int, k: int, rng: RngConfig) -> list[np.ndarray]:
    """Seeded shuffle split into ``k`` folds whose sizes differ by at most one."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of projects ({n})")
    order = rng.generator("kfold", 0).permutation(n)
    return [np.sort(f) for f in np.array_split(order, k)]


def kfold_validate(d: Dataset, attrs: Sequence[str], k: int = 10,
                   mode: DeltaMode = DeltaMode.LITERAL,
                   rng: RngConfig = RngConfig()) -> ValidationResult:
    folds = kfold_assignment(d.n, k, rng)
    return _result(d, _holdout_predictions(d, folds, list(attrs), mode), "kfold",
                   k=k, seed=rng.master_seed)


def brute_force_select(d: Dataset, mode: DeltaMode = DeltaMode.LITERAL,
                       budget: int | None = None, method: str = "jackknife",
                       k: int = 10, rng: RngConfig = RngConfig()
                       ) -> tuple[list[str], ValidationResult]:
    """Exhaustive subset search minimizing validation MMRE.

    Subsets are visited by size then column order, and only a strictly
    lower MMRE replaces the incumbent, so ties keep the smaller, earlier set.
    """
    names = d.attribute_names
    m = len(names)
    if m == 0:
        raise ValueError("dataset has no attributes")
    if budget is None:
        if m > 20:
            raise SubsetSearchTooLarge(
                f"{m} attributes give {2 ** m - 1} subsets; pass a budget"
            )
        budget = m
    best_attrs, best_res = None, None
    for size in range(1, min(budget, m) + 1):
        for combo in itertools.combinations(names, size):
            if method == "jackknife":
                res = jackknife_validate(d, combo, mode)
            else:
                res = kfold_validate(d, combo, k, mode, rng)
            if best_res is None or res.mmre < best_res.mmre:
                best_attrs, best_res = list(combo), res
    return best_attrs, best_res
