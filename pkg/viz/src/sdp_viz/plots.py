"""Plot builders over the profiler's CSV export schemas.

Inputs:
  - values CSV (``dataset,sequence,key,value``): raincloud and KDE plots.
  - pmcc CSV (square matrix, metric ids as header row and first column):
    correlation heatmap.
  - coverage CSV (``step,sequence,new_bins,cumulative_pct``): greedy
    coverage bars.

Everything is deterministic: jitter uses an explicit seed and figures are
rendered at fixed size/dpi through the Agg backend.
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class SchemaError(Exception):
    """Input CSV does not match the expected export schema."""


def read_values_csv(path: str) -> dict[tuple[str, str], np.ndarray]:
    """Per-(dataset, sequence) value arrays from a values export."""
    groups: dict[tuple[str, str], list[float]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"dataset", "sequence", "key", "value"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise SchemaError(f"{path}: expected columns {sorted(required)}")
        for row in reader:
            groups.setdefault((row["dataset"], row["sequence"]), []).append(float(row["value"]))
    if not groups:
        raise SchemaError(f"{path}: no value rows")
    return {key: np.array(vals) for key, vals in sorted(groups.items())}


def read_pmcc_csv(path: str) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "metric_id":
        raise SchemaError(f"{path}: expected a pmcc matrix with a metric_id header")
    names = rows[0][1:]
    body = rows[1:]
    if len(body) != len(names) or any(len(r) != len(names) + 1 for r in body):
        raise SchemaError(f"{path}: matrix is not square")
    matrix = np.full((len(names), len(names)), np.nan)
    for i, row in enumerate(body):
        for j, cell in enumerate(row[1:]):
            if cell != "":
                matrix[i, j] = float(cell)
    return names, matrix


def read_coverage_csv(path: str) -> list[tuple[int, str, float]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"step", "sequence", "cumulative_pct"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise SchemaError(f"{path}: expected columns {sorted(required)}")
        steps = [(int(r["step"]), r["sequence"], float(r["cumulative_pct"])) for r in reader]
    if not steps:
        raise SchemaError(f"{path}: no steps")
    return sorted(steps)


def scott_bandwidth(values: np.ndarray) -> float:
    sigma = values.std(ddof=1) if values.size > 1 else 1.0
    return float(max(sigma, 1e-12) * values.size ** (-1 / 5))


def gaussian_kde(values: np.ndarray, grid: np.ndarray, bandwidth: float) -> np.ndarray:
    z = (grid[:, None] - values[None, :]) / bandwidth
    dens = np.exp(-0.5 * z * z).sum(axis=1)
    return dens / (values.size * bandwidth * np.sqrt(2 * np.pi))


def _new_figure(width=8.0, height=5.0, dpi=100):
    return plt.figure(figsize=(width, height), dpi=dpi)


def _save(fig, out_path: str, dpi=100) -> None:
    # strip variable metadata so identical inputs yield identical bytes
    fig.savefig(out_path, dpi=dpi, metadata={"Software": None})
    plt.close(fig)


def plot_raincloud(values_csv: str, out_path: str, metric: str = "", seed: int = 0) -> None:
    """Half-violin + box + jittered points, one row per sequence."""
    groups = read_values_csv(values_csv)
    rng = np.random.default_rng(seed)
    fig = _new_figure(height=max(3.0, 0.9 * len(groups)))
    ax = fig.add_subplot(111)
    labels = []
    for row, ((dataset, sequence), vals) in enumerate(groups.items()):
        labels.append(f"{dataset}/{sequence}")
        if vals.size > 1 and vals.std() > 0:
            bw = scott_bandwidth(vals)
            grid = np.linspace(vals.min() - 2 * bw, vals.max() + 2 * bw, 120)
            dens = gaussian_kde(vals, grid, bw)
            dens = 0.38 * dens / dens.max()
            ax.fill_between(grid, row, row + dens, color="C0", alpha=0.55, linewidth=0)
        q1, q2, q3 = np.percentile(vals, [25, 50, 75])
        ax.plot([q1, q3], [row, row], color="k", linewidth=3, solid_capstyle="butt")
        ax.plot([q2], [row], marker="|", color="w", markersize=8, markeredgewidth=2, zorder=5)
        jitter = row - 0.08 - 0.22 * rng.random(vals.size)
        ax.plot(vals, jitter, linestyle="", marker=".", markersize=2.5, color="C0", alpha=0.6)
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels(labels, fontsize=8)
    ax.set_xlabel(metric or "value")
    ax.set_title(f"Raincloud: {metric}" if metric else "Raincloud")
    fig.tight_layout()
    _save(fig, out_path)


def plot_kde(values_csv: str, out_path: str, metric: str = "", bandwidth: float | None = None) -> None:
    """One kernel-density curve per dataset (pooled over its sequences)."""
    groups = read_values_csv(values_csv)
    pooled: dict[str, list[np.ndarray]] = {}
    for (dataset, _sequence), vals in groups.items():
        pooled.setdefault(dataset, []).append(vals)
    fig = _new_figure()
    ax = fig.add_subplot(111)
    for idx, (dataset, chunks) in enumerate(sorted(pooled.items())):
        vals = np.concatenate(chunks)
        if vals.std() == 0:
            ax.axvline(vals[0], color=f"C{idx}", label=dataset)
            continue
        bw = bandwidth if bandwidth else scott_bandwidth(vals)
        grid = np.linspace(vals.min() - 3 * bw, vals.max() + 3 * bw, 400)
        ax.plot(grid, gaussian_kde(vals, grid, bw), color=f"C{idx}", label=dataset)
    ax.set_xlabel(metric or "value")
    ax.set_ylabel("density")
    ax.set_title(f"KDE: {metric}" if metric else "KDE")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)


def plot_pmcc_heatmap(pmcc_csv: str, out_path: str) -> None:
    """Correlation heatmap with a fixed [-1, 1] diverging scale.

    Undefined entries (blank cells) render as hatched gray squares.
    """
    names, matrix = read_pmcc_csv(pmcc_csv)
    n = len(names)
    fig = _new_figure(width=max(6.0, 0.28 * n + 2), height=max(5.0, 0.28 * n + 1.5))
    ax = fig.add_subplot(111)
    masked = np.ma.masked_invalid(matrix)
    cmap = plt.get_cmap("coolwarm").copy()
    cmap.set_bad(color="0.85")
    im = ax.imshow(masked, vmin=-1.0, vmax=1.0, cmap=cmap)
    undefined = np.argwhere(np.isnan(matrix))
    for i, j in undefined:
        ax.add_patch(
            plt.Rectangle((j - 0.5, i - 0.5), 1, 1, fill=False, hatch="///", edgecolor="0.6", linewidth=0)
        )
    ax.set_xticks(range(n))
    ax.set_yticks(range(n))
    ax.set_xticklabels(names, rotation=90, fontsize=6)
    ax.set_yticklabels(names, fontsize=6)
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_title("Metric correlation (PMCC)")
    fig.tight_layout()
    _save(fig, out_path)


def plot_coverage(coverage_csv: str, out_path: str) -> None:
    """Cumulative coverage bars for each greedy selection step."""
    steps = read_coverage_csv(coverage_csv)
    fig = _new_figure(width=max(6.0, 1.1 * len(steps) + 2))
    ax = fig.add_subplot(111)
    xs = [s for s, _, _ in steps]
    ax.bar(xs, [c for _, _, c in steps], color="C0", width=0.7)
    ax.set_xticks(xs)
    ax.set_xticklabels([seq for _, seq, _ in steps], rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("cumulative coverage [%]")
    ax.set_ylim(0, 105)
    ax.axhline(100.0, color="0.5", linewidth=0.8, linestyle="--")
    ax.set_title("Greedy coverage subset")
    fig.tight_layout()
    _save(fig, out_path)
