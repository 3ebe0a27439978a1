"""JSON report documents and the plain-text tables printed by the CLI."""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
from typing import Any

import numpy as np

from . import __version__
from .analogy import ValidationResult
from .dataset_io import AttributeKind, Dataset
from .pipeline import AttributeReport, QualityVerdict, RunConfig, SelectionStep

TIMESTAMP_KEY = "timestamp"


def sig6(x: float | None) -> float | None:
    """Round to 6 significant digits; non-finite values become null."""
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.6g}")


def dataset_fingerprint(d: Dataset) -> dict:
    h = hashlib.sha256()
    h.update("\x1f".join(d.project_ids).encode())
    for name, col in d.columns.items():
        h.update(f"\x1e{name}:{d.kinds[name].value}\x1f".encode())
        if d.kinds[name] is AttributeKind.NUMERIC:
            h.update(np.asarray(col, dtype="<f8").tobytes())
        else:
            h.update("\x1f".join("" if v is None else str(v) for v in col).encode())
    h.update(b"\x1eeffort\x1f")
    h.update(np.asarray(d.effort, dtype="<f8").tobytes())
    return {"rows": d.n, "columns": len(d.columns) + 1, "sha256": h.hexdigest()}


def _estimate(est) -> dict:
    return {
        "attributes": list(est.attrs),
        "point_corr": sig6(est.point_corr),
        "tau_r": sig6(est.tau_r),
        "p_value": sig6(est.p_value),
        "lcl": sig6(est.lcl),
        "ucl": sig6(est.ucl),
        "ci_width": sig6(est.ci_width),
        "z0": sig6(est.z0),
        "accel": sig6(est.accel),
    }


def _stage1(r: AttributeReport) -> dict:
    return {"name": r.name, "significant": r.significant, **_estimate(r.estimate)}


def _step(s: SelectionStep) -> dict:
    return {"candidate": list(s.candidate), "accepted": s.accepted, "reason": s.reason,
            **{k: v for k, v in _estimate(s.estimate).items() if k != "attributes"}}


def validation_dict(v: ValidationResult) -> dict:
    out = {
        "method": v.method,
        "mmre": sig6(v.mmre),
        "mdmre": sig6(v.mdmre),
        "pred25": sig6(v.pred25),
        "n": len(v.records),
    }
    if v.k is not None:
        out["k"] = v.k
    return out


def build_report(d: Dataset, cfg: RunConfig, verdict: QualityVerdict | None = None,
                 stage1: list[AttributeReport] | None = None,
                 validation: ValidationResult | None = None,
                 extra: dict | None = None) -> dict:
    doc: dict[str, Any] = {
        "tool_version": __version__,
        TIMESTAMP_KEY: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config": cfg.to_dict(),
        "dataset_fingerprint": dataset_fingerprint(d),
    }
    if verdict is not None:
        doc["verdict"] = {
            "reliable": verdict.reliable,
            "hypothesis": "H1" if verdict.reliable else "H0",
            "final_tau_r": sig6(verdict.final_tau_r),
        }
        doc["selected_attributes"] = list(verdict.selected_attrs)
        doc["removed_projects"] = list(verdict.removed_projects)
        stage1 = verdict.stage1
        doc["stage2_trace"] = [_step(s) for s in verdict.stage2]
        doc["stage3"] = [
            {"id": c.id, "row_corr": sig6(c.row_corr), "p_value": sig6(c.p_value),
             "removed": c.removed, "pass": c.pass_index}
            for c in verdict.stage3
        ]
    if stage1 is not None:
        doc["stage1"] = [_stage1(r) for r in stage1]
    doc["metrics"] = validation_dict(validation) if validation is not None else None
    if extra:
        doc.update(extra)
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def without_timestamp(doc: dict) -> dict:
    return {k: v for k, v in doc.items() if k != TIMESTAMP_KEY}


def stage1_table(reports: list[AttributeReport], alpha: float) -> str:
    lines = [f"{'Feature':<20} {'tau_r':>9} {'p-value':>9} {'LCL':>9} {'UCL':>9}"]
    for r in reports:
        star = "*" if r.significant else " "
        e = r.estimate
        lines.append(f"{r.name:<20} {e.tau_r:>9.4f} {e.p_value:>8.3f}{star} "
                     f"{e.lcl:>9.4f} {e.ucl:>9.4f}")
    lines.append(f"*: correlation is significant at {alpha:g}")
    return "\n".join(lines)


def metrics_table(rows: list[tuple[str, ValidationResult]]) -> str:
    lines = [f"{'Method':<30} {'MMRE':>8} {'PRED(25)':>9} {'MdMRE':>8}"]
    for label, v in rows:
        lines.append(f"{label:<30} {100 * v.mmre:>8.2f} {v.pred25:>9.1f} {100 * v.mdmre:>8.2f}")
    return "\n".join(lines)


def ranksum_table(label: str, p_value: float, rank_sum: float) -> str:
    return "\n".join([
        f"{'Comparison':<30} {'p-value':>8} {'Sum rank':>9}",
        f"{label:<30} {p_value:>8.3f} {rank_sum:>9g}",
    ])
