"""Dataset-level analysis: statistics, diversity, correlation, coverage.

Observations pool at each metric's own level: sample-level metrics pool raw
sample values (per sequence, per dataset, and across datasets), while
sequence-level metrics pool the per-sequence scalars. Diversity treats each
distinct value (after rounding to a configurable precision) as a category;
correlation observes per-sequence means; coverage asks which sequences'
histograms jointly span a metric's global support.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import Applicability, CharacterizationLevel
from .handler import Scoreboard

DEFAULT_PRECISION = 6
COVERAGE_BINS = 100
COVERAGE_MIN_COUNT = 1


@dataclass(frozen=True)
class Stats:
    mean: float
    std: float | None  # None when n < 2 (n-1 divisor)
    min: float
    max: float
    n: int


def basic_stats(values: np.ndarray) -> Stats | None:
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return None
    std = float(values.std(ddof=1)) if values.size > 1 else None
    return Stats(
        mean=float(values.mean()),
        std=std,
        min=float(values.min()),
        max=float(values.max()),
        n=int(values.size),
    )


@dataclass
class MetricSummary:
    metric_id: str
    level: CharacterizationLevel
    unit: str
    per_sequence: dict[tuple[str, str], Stats]  # (dataset, sequence) -> stats
    per_dataset: dict[str, Stats | None]
    aggregated: Stats | None


def metric_values_by_sequence(board: Scoreboard, metric_id: str) -> dict[str, np.ndarray]:
    """PRESENT values of one metric keyed by sequence name."""
    out: dict[str, np.ndarray] = {}
    for (seq, _element), cell in board.cells.items():
        if cell.status != "ok":
            continue
        for record in cell.records:
            if record.metric_id != metric_id or record.applicability is Applicability.ABSENT:
                continue
            vals = record.value_array()
            if vals.size:
                out[seq] = np.concatenate([out.get(seq, np.empty(0)), vals])
    return out


def metric_catalog(boards: list[Scoreboard]) -> dict[str, tuple[CharacterizationLevel, str]]:
    """All metric ids present in any board, with their level and unit."""
    catalog: dict[str, tuple[CharacterizationLevel, str]] = {}
    for board in boards:
        for cell in board.cells.values():
            for record in cell.records:
                catalog.setdefault(record.metric_id, (record.level, record.unit))
    return catalog


def summarize(boards: list[Scoreboard], metric_id: str) -> MetricSummary | None:
    """Per-sequence, per-dataset (pooled), and cross-dataset pooled stats."""
    level_unit = metric_catalog(boards).get(metric_id)
    if level_unit is None:
        return None
    level, unit = level_unit
    per_sequence: dict[tuple[str, str], Stats] = {}
    per_dataset: dict[str, Stats | None] = {}
    pooled_all: list[np.ndarray] = []
    for board in boards:
        by_seq = metric_values_by_sequence(board, metric_id)
        pooled_ds: list[np.ndarray] = []
        for seq in sorted(by_seq):
            stats = basic_stats(by_seq[seq])
            if stats is not None:
                per_sequence[(board.dataset_name, seq)] = stats
            pooled_ds.append(by_seq[seq])
        if pooled_ds:
            pooled = np.concatenate(pooled_ds)
            per_dataset[board.dataset_name] = basic_stats(pooled)
            pooled_all.append(pooled)
        else:
            per_dataset[board.dataset_name] = None
    aggregated = basic_stats(np.concatenate(pooled_all)) if pooled_all else None
    if aggregated is None:
        return None
    return MetricSummary(
        metric_id=metric_id,
        level=level,
        unit=unit,
        per_sequence=per_sequence,
        per_dataset=per_dataset,
        aggregated=aggregated,
    )


def quantize(values: np.ndarray, precision: int = DEFAULT_PRECISION) -> np.ndarray:
    return np.round(np.asarray(values, dtype=np.float64), precision) + 0.0  # fold -0.0 into 0.0


def shannon_entropy(values, precision: int = DEFAULT_PRECISION) -> float:
    """H = -sum p_i ln p_i over distinct quantized values (natural log)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("empty values")
    _, counts = np.unique(quantize(values, precision), return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def simpson_diversity(values, precision: int = DEFAULT_PRECISION) -> float:
    """SDI = 1 - sum n_i (n_i - 1) / (N (N - 1)) over quantized categories."""
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if n < 2:
        raise ValueError("need at least 2 values")
    _, counts = np.unique(quantize(values, precision), return_counts=True)
    return float(1.0 - (counts * (counts - 1)).sum() / (n * (n - 1)))


@dataclass
class DiversityScores:
    entropy: float
    sdi: float | None
    n: int


def diversity(values, precision: int = DEFAULT_PRECISION) -> DiversityScores:
    values = np.asarray(values, dtype=np.float64)
    sdi = simpson_diversity(values, precision) if values.size >= 2 else None
    return DiversityScores(entropy=shannon_entropy(values, precision), sdi=sdi, n=int(values.size))


def pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    """Product-moment correlation; None for degenerate inputs."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size or x.size < 2:
        return None
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt((dx * dx).sum())
    sy = math.sqrt((dy * dy).sum())
    if sx == 0.0 or sy == 0.0:
        return None
    return float((dx * dy).sum() / (sx * sy))


@dataclass
class CorrelationMatrix:
    metric_ids: list[str]
    matrix: np.ndarray  # NaN where undefined


def pmcc_matrix(board: Scoreboard, metric_ids: list[str]) -> CorrelationMatrix:
    """Pairwise Pearson correlations over per-sequence mean observations.

    Pairs use pairwise-complete sequences; entries with fewer than two
    shared observations or zero variance stay NaN (rendered blank).
    """
    observations: dict[str, dict[str, float]] = {}
    for metric_id in metric_ids:
        by_seq = metric_values_by_sequence(board, metric_id)
        observations[metric_id] = {seq: float(v.mean()) for seq, v in by_seq.items() if v.size}
    n = len(metric_ids)
    matrix = np.full((n, n), np.nan)
    for i, mi in enumerate(metric_ids):
        for j in range(i, n):
            mj = metric_ids[j]
            shared = sorted(set(observations[mi]) & set(observations[mj]))
            if len(shared) >= 2:
                r = pearson(
                    np.array([observations[mi][s] for s in shared]),
                    np.array([observations[mj][s] for s in shared]),
                )
                if r is not None:
                    matrix[i, j] = matrix[j, i] = r
    return CorrelationMatrix(metric_ids=list(metric_ids), matrix=matrix)


@dataclass
class CoverageResult:
    metric_id: str
    bins: int
    min_count: int
    occupied_bins: int  # size of the union of per-sequence occupied sets
    steps: list[tuple[str, int, float]]  # (sequence, newly covered, cumulative %)


def coverage_analysis(
    values_by_sequence: dict[str, np.ndarray],
    metric_id: str,
    bins: int = COVERAGE_BINS,
    min_count: int = COVERAGE_MIN_COUNT,
) -> CoverageResult:
    """Greedy minimal sequence subset covering the metric's histogram support.

    The histogram spans the global [min, max] with ``bins`` equal bins; a
    sequence occupies a bin when at least ``min_count`` of its samples fall
    there. Greedy selection repeatedly adds the sequence covering the most
    still-uncovered bins (ties break to the lexicographically smaller name)
    until the union of occupied bins is covered.
    """
    if not values_by_sequence:
        raise ValueError("no values")
    pooled = np.concatenate(list(values_by_sequence.values()))
    lo, hi = float(pooled.min()), float(pooled.max())
    if lo == hi:
        edges = np.array([lo, hi + 1.0])
    else:
        edges = np.linspace(lo, hi, bins + 1)
    occupied: dict[str, frozenset[int]] = {}
    for seq, values in values_by_sequence.items():
        counts, _ = np.histogram(values, bins=edges)
        occupied[seq] = frozenset(np.nonzero(counts >= min_count)[0].tolist())
    universe = frozenset().union(*occupied.values())
    steps: list[tuple[str, int, float]] = []
    covered: set[int] = set()
    remaining = dict(occupied)
    while covered != set(universe) and remaining:
        best_seq = min(remaining, key=lambda s: (-len(remaining[s] - covered), s))
        gain = len(remaining[best_seq] - covered)
        if gain == 0:
            break
        covered |= remaining.pop(best_seq)
        steps.append((best_seq, gain, 100.0 * len(covered) / len(universe) if universe else 100.0))
    return CoverageResult(
        metric_id=metric_id,
        bins=bins,
        min_count=min_count,
        occupied_bins=len(universe),
        steps=steps,
    )


def _fmt(value) -> str:
    if value is None:
        return "-"
    return repr(float(value))


def write_summary_csv(summaries: list[MetricSummary], dataset_names: list[str], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["metric_id", "level", "unit"]
        for name in dataset_names:
            header += [f"{name}_mean", f"{name}_std", f"{name}_min", f"{name}_max", f"{name}_n"]
        header += ["aggregated_mean", "aggregated_std", "aggregated_min", "aggregated_max", "aggregated_n"]
        writer.writerow(header)
        for summary in summaries:
            row = [summary.metric_id, summary.level.value, summary.unit]
            for name in dataset_names:
                stats = summary.per_dataset.get(name)
                if stats is None:
                    row += ["-"] * 5
                else:
                    row += [_fmt(stats.mean), _fmt(stats.std), _fmt(stats.min), _fmt(stats.max), str(stats.n)]
            agg = summary.aggregated
            row += [_fmt(agg.mean), _fmt(agg.std), _fmt(agg.min), _fmt(agg.max), str(agg.n)]
            writer.writerow(row)


def write_diversity_csv(rows: list[tuple[str, str, DiversityScores | None]], path: str) -> None:
    """rows: (metric_id, dataset, scores or None for absent)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric_id", "dataset", "entropy", "sdi", "n"])
        for metric_id, dataset, scores in rows:
            if scores is None:
                writer.writerow([metric_id, dataset, "-", "-", "0"])
            else:
                writer.writerow(
                    [metric_id, dataset, _fmt(scores.entropy), _fmt(scores.sdi), str(scores.n)]
                )


def write_pmcc_csv(corr: CorrelationMatrix, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric_id"] + corr.metric_ids)
        for i, metric_id in enumerate(corr.metric_ids):
            row = [metric_id]
            for j in range(len(corr.metric_ids)):
                v = corr.matrix[i, j]
                row.append("" if np.isnan(v) else repr(float(v)))
            writer.writerow(row)


def write_coverage_csv(result: CoverageResult, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "sequence", "new_bins", "cumulative_pct"])
        for step, (seq, gain, cum) in enumerate(result.steps, start=1):
            writer.writerow([str(step), seq, str(gain), repr(float(cum))])


def write_values_csv(boards: list[Scoreboard], metric_id: str, path: str) -> None:
    """Long-format per-sequence values for one metric (viz raincloud input)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dataset", "sequence", "key", "value"])
        for board in boards:
            for (seq, _element), cell in sorted(board.cells.items()):
                if cell.status != "ok":
                    continue
                for record in cell.records:
                    if record.metric_id != metric_id:
                        continue
                    for key, value in record.values:
                        writer.writerow([board.dataset_name, seq, key, repr(float(value))])
