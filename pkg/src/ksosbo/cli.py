"""Command-line interface.

Subcommands:
- run: execute the experiment grid described by a JSON config.
- report: print the experiment summary as CSV or JSON.
- verify: recompute every summary metric from the raw run CSVs and compare.
- surrogate1d: emit the 1D acquisition-vs-surrogate scan data as CSV.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .errors import ConfigurationError, InputError, NumericalError
from .harness import (
    SUMMARY_FILE,
    load_config,
    run_experiment,
    surrogate_scan_1d,
    verify_outputs,
    write_surrogate_csv,
)


def _cmd_run(args) -> int:
    spec = load_config(args.config)
    paths = run_experiment(spec, args.out, workers=args.workers)
    print(f"wrote {len(paths['runs'])} run files, {paths['summary']}, {paths['manifest']}")
    return 0


def _cmd_report(args) -> int:
    summary = Path(args.indir) / SUMMARY_FILE
    if not summary.exists():
        raise InputError(f"missing {SUMMARY_FILE} in {args.indir}")
    text = summary.read_text(encoding="utf-8")
    if args.format == "csv":
        sys.stdout.write(text)
        return 0
    reader = csv.DictReader(text.splitlines())
    # Cells stay strings: the summary holds markers (inf, undefined) that
    # have no strict-JSON float encoding.
    print(json.dumps(list(reader), indent=2))
    return 0


def _cmd_verify(args) -> int:
    discrepancies = verify_outputs(args.indir)
    if not discrepancies:
        print("verification passed: summary matches the recomputation from run CSVs")
        return 0
    for line in discrepancies:
        print(line, file=sys.stderr)
    print(f"verification FAILED: {len(discrepancies)} discrepancies", file=sys.stderr)
    return 1


def _cmd_surrogate1d(args) -> int:
    rows = surrogate_scan_1d(
        args.benchmark, steps=args.steps, kernel_kind=args.kernel, seed=args.seed
    )
    write_surrogate_csv(args.out, rows)
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ksosbo",
        description="Bayesian-optimization benchmark harness with a kernel sum-of-squares acquisition optimizer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiment grid from a JSON config")
    p_run.add_argument("--config", required=True, help="path to the experiment config JSON")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p_run.set_defaults(func=_cmd_run)

    p_report = sub.add_parser("report", help="print the experiment summary")
    p_report.add_argument("--in", dest="indir", required=True, help="experiment output directory")
    p_report.add_argument("--format", choices=("csv", "json"), default="csv")
    p_report.set_defaults(func=_cmd_report)

    p_verify = sub.add_parser("verify", help="recompute summary metrics from raw run CSVs")
    p_verify.add_argument("--in", dest="indir", required=True, help="experiment output directory")
    p_verify.set_defaults(func=_cmd_verify)

    p_surr = sub.add_parser("surrogate1d", help="emit 1D acquisition and surrogate scan data")
    p_surr.add_argument("--benchmark", required=True, help="benchmark name (evaluated in 1D)")
    p_surr.add_argument("--steps", type=int, default=9, help="BO steps before the scan")
    p_surr.add_argument("--out", required=True, help="output CSV path")
    p_surr.add_argument("--kernel", choices=("gaussian", "laplace"), default="gaussian")
    p_surr.add_argument("--seed", type=int, default=0)
    p_surr.set_defaults(func=_cmd_surrogate1d)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, InputError, NumericalError, OSError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
