"""The three-stage dataset-quality procedure.

1. Screen every attribute on its own: row-wise correlation between its
   similarity matrix and the effort similarity matrix, bootstrap mean and
   BCa interval, permutation p-value.
2. Grow the best attribute greedily: a candidate is accepted only if it
   raises the bootstrap mean correlation and narrows the interval.
3. Drop projects whose own row of similarities is not significantly
   concordant with their row of effort similarities, until none is dropped.

The dataset is judged unreliable when no attribute passes stage 1 or every
project is abnormal.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset_io import Dataset
from .rank_correlation import row_kendall, rowwise_kendall
from .resampling import (
    RngConfig,
    bca_interval,
    bootstrap_corr,
    jackknife_corr,
    permutation_test,
    row_permutation_test,
)
from .similarity import DeltaMode, effort_similarity_matrix, similarity_matrix

log = logging.getLogger(__name__)

MAX_STAGE3_PASSES = 10


@dataclass(frozen=True)
class RunConfig:
    n_perm: int = 1000
    n_boot: int = 1000
    alpha: float = 0.05
    seed: int = 42
    delta_mode: DeltaMode = DeltaMode.LITERAL
    k: int = 10
    threads: int = 1

    def __post_init__(self):
        if self.n_perm < 1 or self.n_boot < 1:
            raise ValueError("n_perm and n_boot must be at least 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        object.__setattr__(self, "delta_mode", DeltaMode(self.delta_mode))

    @property
    def rng(self) -> RngConfig:
        return RngConfig(self.seed)

    def to_dict(self) -> dict:
        # threads is omitted on purpose: results never depend on it
        return {
            "n_perm": self.n_perm,
            "n_boot": self.n_boot,
            "alpha": self.alpha,
            "seed": self.seed,
            "delta_mode": self.delta_mode.value,
            "k": self.k,
        }


@dataclass(frozen=True)
class CorrelationEstimate:
    attrs: tuple[str, ...]
    point_corr: float
    tau_r: float
    p_value: float
    lcl: float
    ucl: float
    z0: float
    accel: float
    n_boot: int
    n_perm: int

    @property
    def ci_width(self) -> float:
        return self.ucl - self.lcl


@dataclass(frozen=True)
class AttributeReport:
    name: str
    estimate: CorrelationEstimate
    significant: bool

    @property
    def tau_r(self) -> float:
        return self.estimate.tau_r

    @property
    def p_value(self) -> float:
        return self.estimate.p_value


@dataclass(frozen=True)
class SelectionStep:
    candidate: tuple[str, ...]
    estimate: CorrelationEstimate
    accepted: bool
    reason: str  # "accepted" | "lower tau_r" | "wider CI" | "not best"


@dataclass(frozen=True)
class ProjectCheck:
    id: str
    row_corr: float
    p_value: float
    removed: bool
    pass_index: int


@dataclass(frozen=True)
class Stage3Result:
    reduced: Dataset
    removed: list[str]
    checks: list[ProjectCheck]
    all_abnormal: bool


@dataclass(frozen=True)
class QualityVerdict:
    reliable: bool
    selected_attrs: list[str]
    removed_projects: list[str]
    stage1: list[AttributeReport]
    stage2: list[SelectionStep]
    stage3: list[ProjectCheck]
    final_tau_r: float | None
    reduced: Dataset | None = field(default=None, repr=False, compare=False)


def estimate_correlation(d: Dataset, attrs: Sequence[str], cfg: RunConfig,
                         with_p_value: bool = True) -> CorrelationEstimate:
    """Point CORR, bootstrap mean, BCa interval and permutation p for ``attrs``.

    All attribute sets share the same bootstrap resamples and permutations
    (common random numbers), so comparisons between sets are not driven by
    seed differences.
    """
    attrs = tuple(attrs)
    rng = cfg.rng
    smx = similarity_matrix(d, attrs, cfg.delta_mode)
    sme = effort_similarity_matrix(d, cfg.delta_mode)
    point = rowwise_kendall(smx, sme).value
    tau_r, boot = bootstrap_corr(d, attrs, cfg.n_boot, cfg.delta_mode, rng,
                                 threads=cfg.threads)
    ci = bca_interval(boot, point, jackknife_corr(d, attrs, cfg.delta_mode), cfg.alpha)
    p = (permutation_test(smx, sme, point, cfg.n_perm, rng, threads=cfg.threads)
         if with_p_value else float("nan"))
    return CorrelationEstimate(attrs, point, tau_r, p, ci.lcl, ci.ucl, ci.z0, ci.accel,
                               cfg.n_boot, cfg.n_perm)


def stage1_screen(d: Dataset, cfg: RunConfig) -> list[AttributeReport]:
    """Per-attribute reports sorted by tau_r descending (ties keep column order)."""
    reports = []
    for name in d.attribute_names:
        est = estimate_correlation(d, [name], cfg)
        reports.append(AttributeReport(name, est, est.p_value < cfg.alpha))
        log.info("stage 1: %s tau_r=%.4f p=%.4f", name, est.tau_r, est.p_value)
    # stable sort keeps column order among equal tau_r
    return sorted(reports, key=lambda r: -r.tau_r)


def stage2_forward_select(d: Dataset, significant: Sequence[AttributeReport] | Sequence[str],
                          cfg: RunConfig) -> tuple[list[str], list[SelectionStep]]:
    """Greedy best-improvement growth from the top attribute.

    Each round tries every remaining significant attribute with the current
    set and keeps the candidate with the highest tau_r, provided it beats the
    current tau_r and has a strictly narrower interval.
    """
    if not significant:
        raise ValueError("stage 2 needs at least one significant attribute")
    reports = [s for s in significant if isinstance(s, AttributeReport)]
    if reports and len(reports) == len(significant):
        names = [r.name for r in reports]
        current_est = reports[0].estimate
    else:
        names = list(significant)
        current_est = None
    if len(names) == 1:
        return names, []
    if current_est is None:
        current_est = estimate_correlation(d, [names[0]], cfg, with_p_value=False)

    order = {a: i for i, a in enumerate(d.attribute_names)}
    selected = [names[0]]
    remaining = names[1:]
    trace: list[SelectionStep] = []
    while remaining:
        tried = []
        for c in remaining:
            combo = tuple(sorted(selected + [c], key=order.__getitem__))
            tried.append((c, estimate_correlation(d, combo, cfg, with_p_value=False)))
        # highest tau_r; ties go to the earlier candidate
        best_c, best_est = max(tried, key=lambda t: t[1].tau_r)
        accepted = False
        for c, est in tried:
            if c != best_c:
                trace.append(SelectionStep(est.attrs, est, False, "not best"))
                continue
            if est.tau_r <= current_est.tau_r:
                reason = "lower tau_r"
            elif est.ci_width >= current_est.ci_width:
                reason = "wider CI"
            else:
                reason = "accepted"
                accepted = True
            trace.append(SelectionStep(est.attrs, est, accepted, reason))
        if not accepted:
            break
        selected.append(best_c)
        remaining.remove(best_c)
        current_est = best_est
        log.info("stage 2: accepted %s tau_r=%.4f", list(best_est.attrs), best_est.tau_r)
    return sorted(selected, key=order.__getitem__), trace


def _stage3_pass(d: Dataset, attrs: Sequence[str], cfg: RunConfig,
                 pass_index: int) -> list[ProjectCheck]:
    sm = similarity_matrix(d, attrs, cfg.delta_mode).values
    se = effort_similarity_matrix(d, cfg.delta_mode).values
    rng = cfg.rng
    checks = []
    for i, pid in enumerate(d.project_ids):
        rx, ry = np.delete(sm[i], i), np.delete(se[i], i)
        corr = row_kendall(rx, ry).value
        # keyed by project id only: a project's draws do not shift when others
        # are removed, which makes a fixpoint pass reproducible on its output
        p = row_permutation_test(rx, ry, cfg.n_perm, rng, tag=f"rowperm:{pid}")
        checks.append(ProjectCheck(pid, corr, p, p >= cfg.alpha, pass_index))
    return checks


def stage3_abnormal(d: Dataset, attrs: Sequence[str], cfg: RunConfig) -> Stage3Result:
    """Remove projects with p >= alpha, repeating until a pass removes nothing."""
    if not attrs:
        raise ValueError("stage 3 needs at least one attribute")
    current = d
    removed: list[str] = []
    checks: list[ProjectCheck] = []
    for pass_index in range(MAX_STAGE3_PASSES):
        if current.n < 3:
            break
        found = _stage3_pass(current, attrs, cfg, pass_index)
        checks.extend(found)
        drop = [c.id for c in found if c.removed]
        if not drop:
            break
        log.info("stage 3 pass %d: removing %s", pass_index, drop)
        removed.extend(drop)
        current = current.drop_ids(drop)
    if current.n < 3:
        # too few projects left to judge anything: all abnormal
        return Stage3Result(current, list(d.project_ids), checks, True)
    return Stage3Result(current, removed, checks, False)


def run_ebaplus(d: Dataset, cfg: RunConfig = RunConfig()) -> QualityVerdict:
    stage1 = stage1_screen(d, cfg)
    significant = [r for r in stage1 if r.significant]
    if not significant:
        return QualityVerdict(False, [], [], stage1, [], [], None)
    selected, trace = stage2_forward_select(d, significant, cfg)
    s3 = stage3_abnormal(d, selected, cfg)
    if s3.all_abnormal:
        return QualityVerdict(False, selected, s3.removed, stage1, trace, s3.checks, None)
    accepted = [s for s in trace if s.accepted]
    final = accepted[-1].estimate.tau_r if accepted else significant[0].tau_r
    if s3.removed:
        final = estimate_correlation(s3.reduced, selected, cfg, with_p_value=False).tau_r
    return QualityVerdict(True, selected, s3.removed, stage1, trace, s3.checks, final,
                          reduced=s3.reduced.select(selected))
