"""scikit-learn compatible wrappers around the pipeline and the analogy estimator."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .dataset_io import AttributeKind, Dataset
from .pipeline import RunConfig, run_ebaplus
from .similarity import DeltaMode, cross_distances


def _categorical_mask(categorical_features, n_features: int, names: Sequence[str]) -> np.ndarray:
    mask = np.zeros(n_features, dtype=bool)
    if categorical_features is None:
        return mask
    cf = np.asarray(categorical_features)
    if cf.dtype == bool:
        if cf.shape != (n_features,):
            raise ValueError("boolean categorical_features must have one entry per feature")
        return cf.copy()
    for item in cf.tolist():
        if isinstance(item, str):
            if item not in names:
                raise ValueError(f"unknown categorical feature {item!r}")
            mask[list(names).index(item)] = True
        else:
            mask[int(item)] = True
    return mask


def to_dataset(X: np.ndarray, y, names: Sequence[str], categorical: np.ndarray,
               ids: Sequence[str] | None = None) -> Dataset:
    """Wrap an (n, m) array as a :class:`Dataset`."""
    n = X.shape[0]
    columns, kinds = {}, {}
    for j, name in enumerate(names):
        if categorical[j]:
            columns[name] = np.array([str(v) for v in X[:, j]], dtype=object)
            kinds[name] = AttributeKind.CATEGORICAL
        else:
            col = np.asarray(X[:, j], dtype=float)
            if not np.all(np.isfinite(col)):
                raise ValueError(f"numeric feature {name!r} has non-finite values")
            columns[name] = col
            kinds[name] = AttributeKind.NUMERIC
    effort = np.zeros(n) + np.nan if y is None else np.asarray(y, dtype=float)
    if ids is None:
        ids = [f"P{i + 1}" for i in range(n)]
    return Dataset(tuple(str(i) for i in ids), columns, kinds, effort)


def _feature_names(est, n_features: int) -> list[str]:
    names = getattr(est, "feature_names_in_", None)
    if names is not None:
        return [str(n) for n in names]
    return [f"x{j}" for j in range(n_features)]


class EBAPlusSelector(SelectorMixin, BaseEstimator):
    """Select the attributes and projects that make a dataset fit for analogy estimation.

    Parameters
    ----------
    n_perm : int, default=1000
        Permutations per significance test.
    n_boot : int, default=1000
        Bootstrap resamples per correlation estimate.
    alpha : float, default=0.05
        Significance level for attribute screening and project checks.
    delta_mode : {"literal", "squared"}, default="literal"
        Scaling of numeric attribute differences.
    categorical_features : array-like of int, str or bool, default=None
        Columns compared by label equality rather than numerically.
    random_state : int, default=42
        Master seed for every resampling stream.
    n_jobs : int, default=1
        Worker threads for resampling; results do not depend on it.

    Attributes
    ----------
    verdict_ : QualityVerdict
        Full trace of the three stages.
    reliable_ : bool
        Whether the null hypothesis (dataset not reliable) was rejected.
    inlier_mask_ : ndarray of shape (n_samples,)
        False for projects removed as abnormal.
    """

    def __init__(self, n_perm=1000, n_boot=1000, alpha=0.05, delta_mode="literal",
                 categorical_features=None, random_state=42, n_jobs=1):
        self.n_perm = n_perm
        self.n_boot = n_boot
        self.alpha = alpha
        self.delta_mode = delta_mode
        self.categorical_features = categorical_features
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _config(self) -> RunConfig:
        return RunConfig(n_perm=self.n_perm, n_boot=self.n_boot, alpha=self.alpha,
                         seed=int(self.random_state), delta_mode=DeltaMode(self.delta_mode),
                         threads=self.n_jobs)

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=None, y_numeric=True, ensure_min_samples=3)
        if np.any(np.asarray(y, dtype=float) <= 0):
            raise ValueError("effort values must be strictly positive")
        names = _feature_names(self, X.shape[1])
        self.categorical_mask_ = _categorical_mask(self.categorical_features, X.shape[1], names)
        data = to_dataset(X, y, names, self.categorical_mask_)
        self.verdict_ = run_ebaplus(data, self._config())
        self.reliable_ = self.verdict_.reliable
        chosen = set(self.verdict_.selected_attrs) if self.reliable_ else set()
        self.support_ = np.array([n in chosen for n in names])
        removed = set(self.verdict_.removed_projects)
        self.inlier_mask_ = np.array([pid not in removed for pid in data.project_ids])
        self.tau_r_ = np.array([
            next(r.tau_r for r in self.verdict_.stage1 if r.name == n) for n in names
        ])
        self.pvalues_ = np.array([
            next(r.p_value for r in self.verdict_.stage1 if r.name == n) for n in names
        ])
        return self

    def _get_support_mask(self):
        check_is_fitted(self)
        return self.support_

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.input_tags.string = True
        tags.input_tags.categorical = True
        tags.target_tags.required = True
        return tags


class ClosestAnalogyRegressor(RegressorMixin, BaseEstimator):
    """Predict effort as that of the single most similar training project.

    Distances use per-attribute range scaling computed on the training data;
    equally close analogues are averaged.
    """

    def __init__(self, delta_mode="literal", categorical_features=None):
        self.delta_mode = delta_mode
        self.categorical_features = categorical_features

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=None, y_numeric=True)
        names = _feature_names(self, X.shape[1])
        self.categorical_mask_ = _categorical_mask(self.categorical_features, X.shape[1], names)
        # targets kept apart: the regressor accepts any real-valued y
        self.train_ = to_dataset(X, None, names, self.categorical_mask_)
        self.y_ = np.asarray(y, dtype=float)
        self.names_ = names
        return self

    def kneighbors(self, X):
        """Indices of the closest training projects (a list per row) and their distances."""
        check_is_fitted(self)
        X = validate_data(self, X, dtype=None, reset=False)
        targets = to_dataset(X, None, self.names_, self.categorical_mask_)
        dist = cross_distances(self.train_, targets, self.names_, DeltaMode(self.delta_mode))
        best = dist.min(axis=1)
        idx = [np.flatnonzero(row == b) for row, b in zip(dist, best)]
        return idx, best

    def predict(self, X):
        idx, _ = self.kneighbors(X)
        return np.array([self.y_[i].mean() for i in idx])

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.input_tags.string = True
        tags.input_tags.categorical = True
        return tags
