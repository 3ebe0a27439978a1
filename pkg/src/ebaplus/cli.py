"""Command-line interface.

Exit codes: 0 success / dataset reliable, 1 null hypothesis not rejected,
2 usage or data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .analogy import (
    SubsetSearchTooLarge,
    brute_force_select,
    jackknife_validate,
    kfold_validate,
    read_residuals,
)
from .dataset_io import DatasetError, Schema, dataset_schema, drop_missing, load_dataset, write_dataset
from .pipeline import RunConfig, run_ebaplus, stage1_screen
from .report import (
    build_report,
    dumps,
    metrics_table,
    ranksum_table,
    stage1_table,
)
from .resampling import wilcoxon_rank_sum
from .similarity import DeltaMode

log = logging.getLogger("ebaplus")

EXIT_OK = 0
EXIT_H0 = 1
EXIT_ERROR = 2


class UsageError(Exception):
    pass


def _seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("EBAPLUS_SEED")
    if env is None:
        return 42
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"EBAPLUS_SEED must be an integer, got {env!r}") from None


def _config(args) -> RunConfig:
    try:
        return RunConfig(n_perm=args.nperm, n_boot=args.nboot, alpha=args.alpha,
                         seed=_seed(args.seed), delta_mode=DeltaMode(args.delta),
                         k=args.k, threads=args.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(args):
    schema = Schema.from_json(args.schema)
    d = load_dataset(args.data, schema)
    d, removed = drop_missing(d)
    if removed:
        log.info("dropped %d incomplete projects: %s", len(removed), removed)
    if d.n < 3:
        raise DatasetError(f"only {d.n} complete projects; at least 3 are needed")
    return d


def _out_dir(args) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _validate(d, attrs, args, cfg):
    if args.method == "kfold":
        return kfold_validate(d, attrs, cfg.k, cfg.delta_mode, cfg.rng)
    return jackknife_validate(d, attrs, cfg.delta_mode)


def cmd_assess(args) -> int:
    cfg = _config(args)
    d = _load(args)
    reports = stage1_screen(d, cfg)
    print(stage1_table(reports, cfg.alpha))
    out = _out_dir(args)
    if out is not None:
        (out / "report.json").write_text(dumps(build_report(d, cfg, stage1=reports)))
    return EXIT_OK if any(r.significant for r in reports) else EXIT_H0


def cmd_run(args) -> int:
    cfg = _config(args)
    d = _load(args)
    verdict = run_ebaplus(d, cfg)
    validation = None
    if verdict.reliable and verdict.reduced.n >= 3:
        validation = _validate(verdict.reduced, verdict.selected_attrs, args, cfg)
    doc = build_report(d, cfg, verdict=verdict, validation=validation)
    out = _out_dir(args)
    if out is not None:
        (out / "report.json").write_text(dumps(doc))
        if verdict.reduced is not None:
            write_dataset(verdict.reduced, out / "reduced.csv")
            (out / "reduced.schema.json").write_text(
                json.dumps(dataset_schema(verdict.reduced).to_dict(), indent=2) + "\n")
    else:
        sys.stdout.write(dumps(doc))
    print(stage1_table(verdict.stage1, cfg.alpha), file=sys.stderr)
    log.info("reliable=%s selected=%s removed=%s", verdict.reliable,
             verdict.selected_attrs, verdict.removed_projects)
    return EXIT_OK if verdict.reliable else EXIT_H0


def cmd_validate(args) -> int:
    cfg = _config(args)
    d = _load(args)
    if args.from_report:
        report = json.loads(Path(args.from_report).read_text())
        attrs = report.get("selected_attributes") or []
        d = d.drop_ids(report.get("removed_projects") or [])
    elif args.attrs:
        attrs = [a.strip() for a in args.attrs.split(",") if a.strip()]
    else:
        attrs = d.attribute_names
    if not attrs:
        raise UsageError("no attributes to validate (empty selection)")
    unknown = [a for a in attrs if a not in d.columns]
    if unknown:
        raise UsageError(f"unknown attributes: {unknown}")
    result = _validate(d, attrs, args, cfg)
    print(metrics_table([(",".join(attrs), result)]))
    out = _out_dir(args)
    if out is not None:
        result.to_residual_csv(out / "residuals.csv")
        (out / "metrics.json").write_text(
            dumps(build_report(d, cfg, validation=result, extra={"attributes": attrs})))
    return EXIT_OK


def cmd_compare(args) -> int:
    a = read_residuals(args.residuals_a)
    b = read_residuals(args.residuals_b)
    res = wilcoxon_rank_sum(a, b)
    label = f"{args.label_a} Vs. {args.label_b}"
    print(ranksum_table(label, res.p_value, res.rank_sum))
    return EXIT_OK


def cmd_brute_force(args) -> int:
    cfg = _config(args)
    d = _load(args)
    attrs, result = brute_force_select(d, cfg.delta_mode, args.budget, args.method,
                                       cfg.k, cfg.rng)
    print("selected: " + ",".join(attrs))
    print(metrics_table([(",".join(attrs), result)]))
    out = _out_dir(args)
    if out is not None:
        result.to_residual_csv(out / "residuals.csv")
        (out / "brute_force.json").write_text(
            dumps(build_report(d, cfg, validation=result, extra={"selected_attributes": attrs})))
    return EXIT_OK


def _quiet(p: argparse.ArgumentParser) -> None:
    # also accepted after the subcommand; SUPPRESS keeps the global value otherwise
    p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                   help="no progress on stderr")


def _common(p: argparse.ArgumentParser, data: bool = True) -> None:
    _quiet(p)
    if data:
        p.add_argument("--data", required=True, help="dataset CSV")
        p.add_argument("--schema", required=True, help="schema JSON sidecar")
    p.add_argument("--nperm", type=int, default=1000)
    p.add_argument("--nboot", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (falls back to $EBAPLUS_SEED, then 42)")
    p.add_argument("--delta", choices=[m.value for m in DeltaMode], default="literal")
    p.add_argument("--k", type=int, default=10, help="folds for k-fold validation")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ebaplus", allow_abbrev=False,
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--quiet", action="store_true", help="no progress on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assess", help="stage 1 attribute screening", allow_abbrev=False)
    _common(p)
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("run", help="full three-stage assessment", allow_abbrev=False)
    _common(p)
    p.add_argument("--method", choices=["jackknife", "kfold"], default="jackknife")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="closest-analogy validation", allow_abbrev=False)
    _common(p)
    p.add_argument("--attrs", default=None, help="comma-separated attributes")
    p.add_argument("--from-report", default=None, help="report JSON from `run`")
    p.add_argument("--method", choices=["jackknife", "kfold"], default="jackknife")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compare", help="rank-sum test on two residual files", allow_abbrev=False)
    p.add_argument("--residuals-a", required=True)
    p.add_argument("--residuals-b", required=True)
    p.add_argument("--label-a", default="A")
    p.add_argument("--label-b", default="B")
    _quiet(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("brute-force", help="exhaustive MMRE subset search", allow_abbrev=False)
    _common(p)
    p.add_argument("--budget", type=int, default=None, help="largest subset size")
    p.add_argument("--method", choices=["jackknife", "kfold"], default="jackknife")
    p.set_defaults(func=cmd_brute_force)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, DatasetError, SubsetSearchTooLarge, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
