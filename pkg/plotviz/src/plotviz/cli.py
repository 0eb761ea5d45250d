"""plotviz command line: regenerate result figures from a batch output tree."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .io import PlotDataError
from .plots import DEFAULT_SMOOTHING, FigureSpec, plot_infection, plot_mrd, plot_summary

KINDS = ("infection", "mrd", "summary")

_PLOTTERS = {
    "infection": plot_infection,
    "mrd": plot_mrd,
    "summary": plot_summary,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotviz",
        description="Render infection-rate, MRD, and summary figures from "
                    "simulation batch CSVs.",
    )
    parser.add_argument("--in", dest="input_dir", required=True,
                        help="directory holding run_*.csv and summary.csv")
    parser.add_argument("--out", dest="output_dir", required=True,
                        help="directory for the emitted figures")
    parser.add_argument("--kinds", default=",".join(KINDS),
                        help="comma-separated subset of: " + ",".join(KINDS))
    parser.add_argument("--smooth", type=int, default=DEFAULT_SMOOTHING,
                        help="moving-average window for time-series figures")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    unknown = [k for k in kinds if k not in KINDS]
    if unknown:
        parser.error(f"unknown figure kinds: {', '.join(unknown)}")
    if args.smooth < 1:
        parser.error("--smooth must be >= 1")

    written = []
    for kind in kinds:
        spec = FigureSpec(
            input_dir=Path(args.input_dir),
            output_dir=Path(args.output_dir),
            kind=kind,
            smoothing_window=args.smooth,
        )
        try:
            paths, _ = _PLOTTERS[kind](spec.input_dir, spec)
        except PlotDataError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        written.extend(paths)
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
