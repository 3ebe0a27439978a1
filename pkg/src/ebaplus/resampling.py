"""Permutation tests, bootstrap estimation, BCa intervals and the rank-sum test.

Every replicate draws from its own generator seeded by
``(master_seed, purpose_tag, replicate_index)``, so results depend only on
the inputs and the master seed, never on how replicates are scheduled.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import rankdata

from . import _kernels
from .dataset_io import Dataset
from .rank_correlation import corr_value, rowwise_kendall
from .similarity import DeltaMode, effort_similarity_matrix, similarity_matrix

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class RngConfig:
    master_seed: int = 42

    def generator(self, tag: str, index: int) -> np.random.Generator:
        seed = self.master_seed & _SEED_MASK
        key = [seed & 0xFFFFFFFF, seed >> 32, zlib.crc32(tag.encode()), int(index)]
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))

    def permutations(self, tag: str, n_items: int, count: int) -> np.ndarray:
        out = np.empty((count, n_items), dtype=np.int64)
        for r in range(count):
            out[r] = self.generator(tag, r).permutation(n_items)
        return out

    def resample_indices(self, tag: str, n_items: int, count: int) -> np.ndarray:
        out = np.empty((count, n_items), dtype=np.int64)
        for r in range(count):
            out[r] = self.generator(tag, r).integers(0, n_items, n_items)
        return out


def _chunked(fn: Callable[[np.ndarray], np.ndarray], items: np.ndarray,
             threads: int) -> np.ndarray:
    """Apply ``fn`` to row blocks of ``items`` and concatenate in order."""
    if threads <= 1 or len(items) < 2 * threads:
        return fn(items)
    blocks = np.array_split(items, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(fn, blocks))
    return np.concatenate(parts)


def _p_value(perm_values: np.ndarray, observed: float) -> float:
    return (1 + int(np.count_nonzero(perm_values >= observed))) / (1 + len(perm_values))


def permutation_null(smx, smy, perms: np.ndarray, threads: int = 1) -> np.ndarray:
    """CORR(smx, smy[p][:, p]) for every permutation ``p`` in ``perms``."""
    X = np.ascontiguousarray(getattr(smx, "values", smx), dtype=float)
    Y = np.ascontiguousarray(getattr(smy, "values", smy), dtype=float)
    _, dx, dy = _kernels.matrix_counts(X, Y)
    # permuting rows and columns together keeps every row's tie pattern,
    # so both denominators are unchanged
    nums = _chunked(lambda block: _kernels.permuted_matrix_numerators(X, Y, block),
                    np.ascontiguousarray(perms), threads)
    return np.array([corr_value(k, dx, dy) for k in nums])


def permutation_test(smx, smy, observed: float, n_perm: int = 1000,
                     rng: RngConfig = RngConfig(), tag: str = "perm",
                     threads: int = 1) -> float:
    """Right-tail Mantel-style p-value, ``(1 + #{CORR_perm >= observed}) / (1 + n_perm)``."""
    if n_perm < 1:
        raise ValueError("n_perm must be at least 1")
    n = np.shape(getattr(smy, "values", smy))[0]
    perms = rng.permutations(tag, n, n_perm)
    return _p_value(permutation_null(smx, smy, perms, threads), observed)


def row_permutation_null(row_x, row_y, perms: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(row_x, dtype=float)
    y = np.ascontiguousarray(row_y, dtype=float)
    _, dx, dy = _kernels.row_counts(x, y)
    nums = _kernels.permuted_row_numerators(x, y, np.ascontiguousarray(perms))
    return np.array([corr_value(k, dx, dy) for k in nums])


def row_permutation_test(row_x, row_y, n_perm: int = 1000,
                         rng: RngConfig = RngConfig(), tag: str = "rowperm") -> float:
    """p-value of one row's Kendall correlation against shuffles of ``row_y``."""
    x = np.ascontiguousarray(row_x, dtype=float)
    y = np.ascontiguousarray(row_y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("rows must have equal length")
    num, dx, dy = _kernels.row_counts(x, y)
    observed = corr_value(num, dx, dy)
    perms = rng.permutations(tag, len(y), n_perm)
    return _p_value(row_permutation_null(x, y, perms), observed)


def point_corr(d: Dataset, attrs: Sequence[str], mode: DeltaMode = DeltaMode.LITERAL) -> float:
    return rowwise_kendall(similarity_matrix(d, attrs, mode),
                           effort_similarity_matrix(d, mode)).value


def bootstrap_corr(d: Dataset, attrs: Sequence[str], n_boot: int = 1000,
                   mode: DeltaMode = DeltaMode.LITERAL, rng: RngConfig = RngConfig(),
                   indices: np.ndarray | None = None, tag: str = "bootstrap",
                   threads: int = 1) -> tuple[float, np.ndarray]:
    """Bootstrap mean of CORR and the replicate distribution.

    Each replicate resamples project indices with replacement and rebuilds
    both the attribute and the effort similarity matrices from the resampled
    projects. ``indices`` overrides the drawn resamples (shape
    ``(n_boot, n)``).
    """
    if indices is None:
        if n_boot < 1:
            raise ValueError("n_boot must be at least 1")
        indices = rng.resample_indices(tag, d.n, n_boot)
    indices = np.asarray(indices, dtype=np.int64)
    attrs = list(attrs)

    def run(block: np.ndarray) -> np.ndarray:
        return np.array([point_corr(d.subset(idx), attrs, mode) for idx in block])

    dist = _chunked(run, indices, threads)
    return float(dist.mean()), dist


def jackknife_corr(d: Dataset, attrs: Sequence[str],
                   mode: DeltaMode = DeltaMode.LITERAL) -> np.ndarray:
    """Leave-one-project-out point correlations."""
    everyone = np.arange(d.n)
    return np.array([point_corr(d.subset(np.delete(everyone, i)), attrs, mode)
                     for i in range(d.n)])


@dataclass(frozen=True)
class BCaInterval:
    lcl: float
    ucl: float
    z0: float
    accel: float
    alpha_low: float
    alpha_high: float


def acceleration(jackknife_thetas) -> float:
    t = np.asarray(jackknife_thetas, dtype=float)
    # the ratio is scale-free, so rounding noise in the mean of a constant
    # vector would otherwise produce a spurious acceleration
    if t.size == 0 or np.all(t == t[0]):
        return 0.0
    dev = t.mean() - t
    s2 = float(np.sum(dev ** 2))
    if s2 == 0:
        return 0.0
    return float(np.sum(dev ** 3) / (6.0 * s2 ** 1.5))


def bias_correction(boot, theta_hat: float) -> float:
    b = np.asarray(boot, dtype=float)
    prop = np.count_nonzero(b <= theta_hat) / b.size
    # keep z0 finite when theta_hat lies outside the bootstrap support
    prop = min(max(prop, 0.5 / b.size), 1.0 - 0.5 / b.size)
    return float(ndtri(prop))


def _adjusted_level(z0: float, accel: float, z: float) -> float:
    shift = z0 + z
    denom = 1.0 - accel * shift
    if denom <= 0:
        return 0.0 if z < 0 else 1.0
    return float(ndtr(z0 + shift / denom))


def bca_interval(boot, theta_hat: float, jackknife_thetas=None, alpha: float = 0.05,
                 z0: float | None = None, accel: float | None = None) -> BCaInterval:
    """Bias-corrected and accelerated bootstrap interval.

    ``z0`` and ``accel`` are estimated unless given. The limits are linear
    interpolated empirical quantiles of ``boot`` at the adjusted levels.
    """
    b = np.asarray(boot, dtype=float)
    if b.size == 0:
        raise ValueError("empty bootstrap distribution")
    if z0 is None:
        z0 = bias_correction(b, theta_hat)
    if accel is None:
        accel = acceleration(jackknife_thetas) if jackknife_thetas is not None else 0.0
    lo_q, hi_q = alpha / 2.0, 1.0 - alpha / 2.0
    if z0 == 0 and accel == 0:
        a1, a2 = lo_q, hi_q
    else:
        a1 = _adjusted_level(z0, accel, float(ndtri(lo_q)))
        a2 = _adjusted_level(z0, accel, float(ndtri(hi_q)))
    if np.all(b == b[0]):
        return BCaInterval(float(b[0]), float(b[0]), z0, accel, a1, a2)
    lcl, ucl = np.quantile(b, [a1, a2])
    return BCaInterval(float(lcl), float(ucl), float(z0), float(accel), a1, a2)


@dataclass(frozen=True)
class RankSumResult:
    p_value: float
    rank_sum: float
    z: float


def wilcoxon_rank_sum(a, b) -> RankSumResult:
    """Two-sided rank-sum test, normal approximation with tie and continuity corrections.

    ``rank_sum`` is the sum of the mid-ranks of ``a`` in the pooled sample.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    n1, n2 = a.size, b.size
    N = n1 + n2
    w = float(ranks[:n1].sum())
    mean = n1 * (N + 1) / 2.0
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(counts ** 3 - counts))
    var = n1 * n2 / 12.0 * ((N + 1) - tie_term / (N * (N - 1))) if N > 1 else 0.0
    if var <= 0:
        return RankSumResult(1.0, w, 0.0)
    z = max(abs(w - mean) - 0.5, 0.0) / math.sqrt(var)
    p = min(1.0, 2.0 * float(ndtr(-z)))
    return RankSumResult(p, w, math.copysign(z, w - mean))
