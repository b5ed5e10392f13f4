"""Command line entry point: render one figure from experiment outputs."""

from __future__ import annotations

import argparse
import sys

from .errors import PlotError
from .figures import PLOT_KINDS, PlotJob, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render a figure from benchmark experiment output files.",
    )
    parser.add_argument(
        "--in",
        dest="input_path",
        required=True,
        help="experiment output directory (or surrogate CSV for --kind surrogate_1d)",
    )
    parser.add_argument("--kind", required=True, choices=PLOT_KINDS, help="figure kind")
    parser.add_argument("--out", required=True, help="output image path (.png or .svg)")
    parser.add_argument("--benchmark", default=None, help="restrict to one benchmark")
    parser.add_argument("--dpi", type=int, default=150, help="raster resolution (default 150)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = PlotJob(
            input_path=args.input_path,
            kind=args.kind,
            out_path=args.out,
            benchmark=args.benchmark,
            dpi=args.dpi,
        )
        written = render(job)
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(written)
    return 0


if __name__ == "__main__":
    sys.exit(main())
