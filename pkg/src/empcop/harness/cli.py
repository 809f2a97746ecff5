"""Command line entry point: ``empcop <experiment> [flags]``.

Exit status is 0 when every verdict passes, 1 when any verdict fails and
2 for usage errors or refused runs.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import EXPERIMENTS, OUT_ENV, build_config, read_config_file
from .experiments import ExperimentRefused, run_experiment
from .report import emit_report


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model spec, e.g. family=gaussian,rho=0.5")
    common.add_argument("--n", help="sample size or comma-separated schedule")
    common.add_argument("--reps", type=int, help="Monte Carlo replicates R")
    common.add_argument("--boot", type=int, help="multiplier replicates B")
    common.add_argument("--grid", type=int, help="grid nodes per axis m")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", help=f"output directory (default from ${OUT_ENV})")
    common.add_argument("--functional", help="sup_abs, cvm or both comma-separated")
    common.add_argument("--force", action="store_true", default=None, help="run even if a precondition fails")
    common.add_argument("--config", help="flat key=value file; flags override it")
    parser = argparse.ArgumentParser(prog="empcop", description="Empirical copula process experiments.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("experiment", "config")}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = build_config(args.experiment, file_values, flags)
        report = run_experiment(cfg)
    except ExperimentRefused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    paths = emit_report(report, cfg.out)
    for name, v in report.verdicts.items():
        print(f"{name}: {v['status']} (value={json.dumps(v['value'])}, threshold={json.dumps(v['threshold'])})")
    print(f"wrote {len(paths)} files to {cfg.out}")
    return 1 if report.failed else 0


if __name__ == "__main__":
    sys.exit(main())
