"""The three result figures: infection rate, MRD over time, summary table."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .io import (
    canonical_order,
    load_algorithm_series,
    load_summary_means,
    moving_average,
    rank_algorithms,
)

DEFAULT_SMOOTHING = 10
IMAGE_FORMATS = ("png", "svg")


@dataclass
class FigureSpec:
    input_dir: Path
    output_dir: Path
    kind: str  # infection | mrd | summary
    smoothing_window: int = DEFAULT_SMOOTHING


def _save(fig, output_dir: Path, stem: str) -> list[Path]:
    output_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for fmt in IMAGE_FORMATS:
        path = output_dir / f"{stem}.{fmt}"
        fig.savefig(path, format=fmt, dpi=150)
        paths.append(path)
    plt.close(fig)
    return paths


def _timeseries_figure(spec: FigureSpec, column: str, ylabel: str, title: str,
                       zero_line: bool):
    series = load_algorithm_series(spec.input_dir, column)
    fig, ax = plt.subplots(figsize=(9, 5))
    smoothed_out = {}
    for algorithm in canonical_order(series):
        steps, means = series[algorithm]
        smoothed = moving_average(means, spec.smoothing_window)
        smoothed_out[algorithm] = (steps, smoothed)
        ax.plot(steps, smoothed, label=algorithm, linewidth=1.4)
    if zero_line:
        ax.axhline(0.0, color="black", linewidth=0.8, linestyle="--")
    ax.set_xlabel("step")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    fig.text(0.99, 0.01,
             f"moving average, window={spec.smoothing_window} steps",
             ha="right", fontsize=7, color="gray")
    return fig, smoothed_out


def plot_infection(input_dir, spec: FigureSpec):
    """Infection rate over time: per-step MSP averaged across iterations."""
    fig, data = _timeseries_figure(spec, "msp", "% infected",
                                   "Infection rate over time", zero_line=False)
    paths = _save(fig, Path(spec.output_dir), "infection_rate")
    return paths, data


def plot_mrd(input_dir, spec: FigureSpec):
    """MRD over time with a zero rule for sign readability."""
    fig, data = _timeseries_figure(spec, "mrd", "MRD", "MRD over time",
                                   zero_line=True)
    paths = _save(fig, Path(spec.output_dir), "mrd_over_time")
    return paths, data


def write_summary_table(path: Path, means, ranks) -> None:
    lines = ["algorithm,mean_msp,mean_mrd,mean_mc,rank_msp,rank_mrd,rank_mc"]
    for algorithm in canonical_order(means):
        m = means[algorithm]
        r = ranks[algorithm]
        lines.append(
            f"{algorithm},{m[0]:.6f},{m[1]:.6f},{m[2]:.6f},{r[0]},{r[1]},{r[2]}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def plot_summary(input_dir, spec: FigureSpec):
    """Grouped bars of mean MSP/MRD/MC per algorithm with rank annotations,
    plus the companion summary_table.csv."""
    means = load_summary_means(Path(spec.input_dir) / "summary.csv")
    ranks = rank_algorithms(means)
    algorithms = canonical_order(means)

    fig, axes = plt.subplots(1, 3, figsize=(12, 4.2))
    metric_names = ("mean MSP (%)", "mean MRD", "mean MC")
    for metric_idx, (ax, label) in enumerate(zip(axes, metric_names)):
        values = [means[a][metric_idx] for a in algorithms]
        bars = ax.bar(range(len(algorithms)), values, color="tab:blue")
        ax.set_xticks(range(len(algorithms)))
        ax.set_xticklabels(algorithms, rotation=35, ha="right", fontsize=8)
        ax.set_title(label, fontsize=10)
        if min(values) < 0:
            ax.axhline(0.0, color="black", linewidth=0.8)
        span = max(values) - min(values) or 1.0
        for x, (bar, algorithm) in enumerate(zip(bars, algorithms)):
            height = bar.get_height()
            offset = 0.03 * span if height >= 0 else -0.08 * span
            ax.text(x, height + offset, f"#{ranks[algorithm][metric_idx]}",
                    ha="center", fontsize=8)
    fig.suptitle("Summary of metrics on average (rank #1 = least misinformation)")
    fig.tight_layout()

    output_dir = Path(spec.output_dir)
    paths = _save(fig, output_dir, "summary")
    table_path = output_dir / "summary_table.csv"
    write_summary_table(table_path, means, ranks)
    return paths + [table_path], means
