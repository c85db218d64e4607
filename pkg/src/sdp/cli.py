"""Command-line entry points.

Subcommands: ``adapt`` (dataset tree -> manifest), ``characterize``
(manifest -> scoreboard directory), ``analyze`` (scoreboards -> CSV exports
and text report), ``coverage`` (greedy coverage subset for one metric), and
``report`` (text report only).

Exit codes: 0 ok, 1 error, 2 validation findings, 3 partial
characterization failure, 64 usage.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import analysis, report
from .config import ENV_CONFIG, load_config, parse_config_text
from .handler import (
    ALL_ELEMENT_IDS,
    Scoreboard,
    export_scoreboard,
    load_scoreboard,
    run_characterization,
)
from .manifest import AdaptError, adapt_asl, adapt_kitti, load_manifest, save_manifest, validate_manifest

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FINDINGS = 2
EXIT_PARTIAL = 3
EXIT_USAGE = 64

log = logging.getLogger("sdp")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> Parser:
    parser = Parser(prog="sdp", description="SLAM dataset profiler")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_adapt = sub.add_parser("adapt", help="adapt a dataset tree into a manifest")
    p_adapt.add_argument("dataset_type", choices=["kitti", "asl"])
    p_adapt.add_argument("root")
    p_adapt.add_argument("-o", "--out", required=True, help="output manifest path")
    p_adapt.add_argument("--name", default=None, help="dataset name recorded in the manifest")

    p_char = sub.add_parser("characterize", help="run processing elements over manifests")
    p_char.add_argument("manifests", nargs="+")
    p_char.add_argument("-o", "--out", required=True, help="output directory")
    p_char.add_argument("--config", default=None, help=f"config file (default ${ENV_CONFIG})")
    p_char.add_argument("--threads", type=int, default=None)
    p_char.add_argument(
        "--elements",
        default=None,
        help="comma-separated element ids (default: all of %s)" % ",".join(ALL_ELEMENT_IDS),
    )
    p_char.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config key (repeatable)",
    )

    p_analyze = sub.add_parser("analyze", help="statistics, diversity, and correlation exports")
    p_analyze.add_argument("scoreboards", nargs="+")
    p_analyze.add_argument("-o", "--out", required=True)
    p_analyze.add_argument("--precision", type=int, default=analysis.DEFAULT_PRECISION)
    p_analyze.add_argument(
        "--values",
        action="append",
        default=[],
        metavar="METRIC",
        help="also export values_<metric>.csv (repeatable)",
    )

    p_cov = sub.add_parser("coverage", help="greedy coverage subset for one metric")
    p_cov.add_argument("scoreboards", nargs="+")
    p_cov.add_argument("--metric", required=True)
    p_cov.add_argument("--bins", type=int, default=analysis.COVERAGE_BINS)
    p_cov.add_argument("--min-count", type=int, default=analysis.COVERAGE_MIN_COUNT)
    p_cov.add_argument("-o", "--out", required=True)

    p_report = sub.add_parser("report", help="plain-text report only")
    p_report.add_argument("scoreboards", nargs="+")
    p_report.add_argument("-o", "--out", required=True)

    return parser


def _cmd_adapt(args) -> int:
    if not os.path.isdir(args.root):
        print(f"error: no such directory: {args.root}", file=sys.stderr)
        return EXIT_ERROR
    if args.dataset_type == "kitti":
        manifest = adapt_kitti(args.root, dataset_name=args.name or "kitti")
    else:
        if not args.name:
            raise UsageError("adapt asl requires --name")
        manifest = adapt_asl(args.root, dataset_name=args.name)
    save_manifest(manifest, args.out)
    findings = validate_manifest(manifest)
    if findings:
        for finding in findings:
            print(f"finding: {finding}", file=sys.stderr)
        return EXIT_FINDINGS
    return EXIT_OK


def _parse_overrides(pairs: list[str]) -> str:
    return "\n".join(pairs)


def _cmd_characterize(args) -> int:
    cfg = load_config(args.config)
    if args.set:
        cfg = parse_config_text(_parse_overrides(args.set), cfg)
    if args.threads is not None:
        cfg = replace(cfg, threads=args.threads)
    cfg.validate()
    element_ids = args.elements.split(",") if args.elements else None
    os.makedirs(args.out, exist_ok=True)
    failed: list[str] = []
    for manifest_path in args.manifests:
        manifest = load_manifest(manifest_path)
        findings = validate_manifest(manifest)
        if findings:
            for finding in findings:
                print(f"finding: {finding}", file=sys.stderr)
            return EXIT_FINDINGS
        board = run_characterization(manifest, element_ids=element_ids, cfg=cfg)
        export_scoreboard(board, os.path.join(args.out, manifest.dataset_name))
        failed += [
            f"{manifest.dataset_name}/{seq}/{element}: {cell.error}"
            for (seq, element), cell in sorted(board.cells.items())
            if cell.status == "failed"
        ]
    if failed:
        for line in failed:
            print(f"failed cell: {line}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _load_boards(paths: list[str]) -> list[Scoreboard]:
    boards = []
    for path in paths:
        if not os.path.isfile(os.path.join(path, "scoreboard.json")):
            raise FileNotFoundError(f"not a scoreboard directory: {path}")
        boards.append(load_scoreboard(path))
    return boards


def _analysis_products(boards, precision):
    catalog = analysis.metric_catalog(boards)
    metric_ids = report.order_metrics(catalog)
    summaries = []
    diversity_rows = []
    for metric_id in metric_ids:
        summary = analysis.summarize(boards, metric_id)
        if summary is not None:
            summaries.append(summary)
        for board in boards:
            by_seq = analysis.metric_values_by_sequence(board, metric_id)
            if by_seq:
                pooled = np.concatenate([by_seq[s] for s in sorted(by_seq)])
                diversity_rows.append(
                    (metric_id, board.dataset_name, analysis.diversity(pooled, precision))
                )
            else:
                diversity_rows.append((metric_id, board.dataset_name, None))
    return metric_ids, summaries, diversity_rows


def _cmd_analyze(args) -> int:
    boards = _load_boards(args.scoreboards)
    os.makedirs(args.out, exist_ok=True)
    dataset_names = [b.dataset_name for b in boards]
    metric_ids, summaries, diversity_rows = _analysis_products(boards, args.precision)
    analysis.write_summary_csv(summaries, dataset_names, os.path.join(args.out, "summary.csv"))
    analysis.write_diversity_csv(diversity_rows, os.path.join(args.out, "diversity.csv"))
    for board in boards:
        corr = analysis.pmcc_matrix(board, metric_ids)
        analysis.write_pmcc_csv(corr, os.path.join(args.out, f"pmcc_{board.dataset_name}.csv"))
    for metric_id in args.values:
        safe = metric_id.replace("/", "_")
        analysis.write_values_csv(boards, metric_id, os.path.join(args.out, f"values_{safe}.csv"))
    text = report.render_report(
        summaries, diversity_rows, dataset_names, provenance_lines=_provenance_lines(boards)
    )
    with open(os.path.join(args.out, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    return EXIT_OK


def _provenance_lines(boards) -> list[str]:
    lines = []
    for board in boards:
        p = board.provenance
        lines.append(
            f"dataset {board.dataset_name}: tool {p.get('tool_version', '?')}, "
            f"config {p.get('config_hash', '?')}, created {p.get('created', '?')}"
        )
    return lines


def _cmd_coverage(args) -> int:
    boards = _load_boards(args.scoreboards)
    values: dict[str, list] = {}
    for board in boards:
        for seq, vals in analysis.metric_values_by_sequence(board, args.metric).items():
            values[f"{board.dataset_name}/{seq}"] = vals
    if not values:
        print(f"error: no values for metric {args.metric}", file=sys.stderr)
        return EXIT_ERROR
    result = analysis.coverage_analysis(values, args.metric, bins=args.bins, min_count=args.min_count)
    os.makedirs(args.out, exist_ok=True)
    safe = args.metric.replace("/", "_")
    analysis.write_coverage_csv(result, os.path.join(args.out, f"coverage_{safe}.csv"))
    return EXIT_OK


def _cmd_report(args) -> int:
    boards = _load_boards(args.scoreboards)
    os.makedirs(args.out, exist_ok=True)
    dataset_names = [b.dataset_name for b in boards]
    _, summaries, diversity_rows = _analysis_products(boards, analysis.DEFAULT_PRECISION)
    text = report.render_report(
        summaries, diversity_rows, dataset_names, provenance_lines=_provenance_lines(boards)
    )
    with open(os.path.join(args.out, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    return EXIT_OK


_COMMANDS = {
    "adapt": _cmd_adapt,
    "characterize": _cmd_characterize,
    "analyze": _cmd_analyze,
    "coverage": _cmd_coverage,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AdaptError, FileNotFoundError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
