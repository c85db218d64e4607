"""Plain-text report: per-dataset statistics and diversity tables.

One row per metric, one ``mean +- (std)`` column per dataset plus an
Aggregated column when several datasets are analyzed together; a second
table lists entropy and Simpson diversity per metric and dataset. Metrics a
dataset cannot produce (IMU rows on an IMU-less dataset) render as ``-``.
"""

from __future__ import annotations

from .analysis import DiversityScores, MetricSummary

# group header by metric id prefix; also fixes report ordering
_GROUPS = (
    ("General", ("samples.", "duration.", "sample_time.", "sample_dt.", "ts_mismatch.")),
    (
        "Inertial",
        ("accel.", "gyro.", "jerk.", "snap.", "alpha.", "phi.", "accel_magnitude", "rotation_only", "dr_"),
    ),
    (
        "Visual",
        (
            "brightness",
            "exposure.",
            "contrast.",
            "blur.",
            "features.",
            "disparity.",
            "similarity.",
        ),
    ),
)

_NOTES = (
    "notes:",
    "  - mean sample time divides the duration by N-1 intervals, not N samples.",
    "  - second gyro derivative (phi) reported in deg/s^3.",
    "  - '-' marks metrics a dataset cannot produce (e.g. IMU rows without an IMU).",
)


def metric_group(metric_id: str) -> str:
    for group, prefixes in _GROUPS:
        if any(metric_id.startswith(p) for p in prefixes):
            return group
    return "Other"


def order_metrics(metric_ids) -> list[str]:
    group_rank = {name: i for i, (name, _) in enumerate(_GROUPS)}
    group_rank["Other"] = len(_GROUPS)
    return sorted(metric_ids, key=lambda m: (group_rank[metric_group(m)], m))


def _fmt_num(value: float | None) -> str:
    if value is None:
        return "-"
    return f"{value:.3f}"


def _mean_std(stats) -> str:
    if stats is None:
        return "- +- (-)"
    return f"{_fmt_num(stats.mean)} +- ({_fmt_num(stats.std)})"


def render_report(
    summaries: list[MetricSummary],
    diversity_rows: list[tuple[str, str, DiversityScores | None]],
    dataset_names: list[str],
    provenance_lines: list[str] | None = None,
) -> str:
    show_aggregated = len(dataset_names) > 1
    columns = list(dataset_names) + (["Aggregated"] if show_aggregated else [])
    label_width = max([len("metric [unit]")] + [len(f"{s.metric_id} [{s.unit}]") for s in summaries])
    col_width = max(24, *(len(c) + 2 for c in columns))

    lines = ["Dataset characterization report", "=" * 40, ""]
    if provenance_lines:
        lines.extend(provenance_lines)
        lines.append("")

    ordered = {s.metric_id: s for s in summaries}
    metric_ids = order_metrics(ordered)

    lines.append("Statistics (mean +- (std))")
    lines.append("-" * 40)
    header = "metric [unit]".ljust(label_width) + "".join(c.rjust(col_width) for c in columns)
    current_group = None
    for metric_id in metric_ids:
        summary = ordered[metric_id]
        group = metric_group(metric_id)
        if group != current_group:
            lines.append("")
            lines.append(f"[{group}]")
            lines.append(header)
            current_group = group
        row = f"{summary.metric_id} [{summary.unit}]".ljust(label_width)
        for name in dataset_names:
            row += _mean_std(summary.per_dataset.get(name)).rjust(col_width)
        if show_aggregated:
            row += _mean_std(summary.aggregated).rjust(col_width)
        lines.append(row)

    lines.append("")
    lines.append("Diversity (entropy H in nats / Simpson diversity index)")
    lines.append("-" * 40)
    by_metric: dict[str, dict[str, DiversityScores | None]] = {}
    for metric_id, dataset, scores in diversity_rows:
        by_metric.setdefault(metric_id, {})[dataset] = scores
    header = "metric".ljust(label_width) + "".join(c.rjust(col_width) for c in dataset_names)
    current_group = None
    for metric_id in order_metrics(by_metric):
        group = metric_group(metric_id)
        if group != current_group:
            lines.append("")
            lines.append(f"[{group}]")
            lines.append(header)
            current_group = group
        row = metric_id.ljust(label_width)
        for name in dataset_names:
            scores = by_metric[metric_id].get(name)
            if scores is None:
                cell = "- / -"
            else:
                cell = f"{_fmt_num(scores.entropy)} / {_fmt_num(scores.sdi)}"
            row += cell.rjust(col_width)
        lines.append(row)

    lines.append("")
    lines.extend(_NOTES)
    lines.append("")
    return "\n".join(lines)
