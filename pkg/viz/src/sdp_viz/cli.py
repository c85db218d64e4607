"""sdp-viz: render one plot kind from one exported CSV.

Usage: sdp-viz <raincloud|kde|heatmap|coverage> --in <csv> --out <img>
       [--metric NAME] [--seed N] [--bandwidth H]
"""

from __future__ import annotations

import argparse
import sys

from .plots import SchemaError, plot_coverage, plot_kde, plot_pmcc_heatmap, plot_raincloud


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdp-viz", description="plots from profiler CSV exports")
    parser.add_argument("kind", choices=["raincloud", "kde", "heatmap", "coverage"])
    parser.add_argument("--in", dest="input", required=True, help="input CSV path")
    parser.add_argument("--out", dest="output", required=True, help="output image path")
    parser.add_argument("--metric", default="", help="metric label (raincloud/kde)")
    parser.add_argument("--seed", type=int, default=0, help="jitter seed (raincloud)")
    parser.add_argument("--bandwidth", type=float, default=None, help="KDE bandwidth override")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.kind == "raincloud":
            plot_raincloud(args.input, args.output, metric=args.metric, seed=args.seed)
        elif args.kind == "kde":
            plot_kde(args.input, args.output, metric=args.metric, bandwidth=args.bandwidth)
        elif args.kind == "heatmap":
            plot_pmcc_heatmap(args.input, args.output)
        else:
            plot_coverage(args.input, args.output)
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
