"""Reading the simulator's CSV outputs.

plotviz never recomputes simulation quantities: it only averages series
across iterations and renders them. The schemas here mirror the batch
runner's run files (``run_<algorithm>_<iteration>.csv``) and ``summary.csv``.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path

ALGORITHM_ORDER = ("random", "popularity", "user_knn", "item_knn", "content_based")

RUN_FILE_RE = re.compile(r"run_(?P<algorithm>[a-z_]+)_(?P<iteration>\d+)\.csv$")

REQUIRED_RUN_COLUMNS = {"step", "msp", "mrd", "mc"}
SUMMARY_COLUMNS = ["algorithm", "iteration", "mean_msp", "mean_mrd", "mean_mc"]


class PlotDataError(RuntimeError):
    pass


@dataclass
class RunSeries:
    algorithm: str
    iteration: int
    steps: list[int]
    values: dict[str, list[float]] = field(default_factory=dict)


def canonical_order(algorithms) -> list[str]:
    known = {a: i for i, a in enumerate(ALGORITHM_ORDER)}
    return sorted(algorithms, key=lambda a: (known.get(a, len(known)), a))


def discover_runs(input_dir: Path) -> dict[str, list[Path]]:
    """Map algorithm name -> run CSV paths found in ``input_dir``."""
    found: dict[str, list[Path]] = {}
    for path in sorted(Path(input_dir).glob("run_*.csv")):
        match = RUN_FILE_RE.match(path.name)
        if match:
            found.setdefault(match.group("algorithm"), []).append(path)
    return found


def load_run(path: Path) -> RunSeries:
    match = RUN_FILE_RE.match(path.name)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not REQUIRED_RUN_COLUMNS <= set(reader.fieldnames):
            raise PlotDataError(
                f"{path}: missing required columns {sorted(REQUIRED_RUN_COLUMNS)}"
            )
        steps: list[int] = []
        values: dict[str, list[float]] = {"msp": [], "mrd": [], "mc": []}
        for row in reader:
            steps.append(int(row["step"]))
            for column in values:
                values[column].append(float(row[column]))
    if not steps:
        raise PlotDataError(f"{path}: run file contains no data rows")
    return RunSeries(
        algorithm=match.group("algorithm"),
        iteration=int(match.group("iteration")),
        steps=steps,
        values=values,
    )


def load_algorithm_series(input_dir: Path, column: str) -> dict[str, tuple[list[int], list[float]]]:
    """Per-algorithm series of ``column`` averaged across iterations per step.

    Raises PlotDataError naming the problem when the directory holds no run
    files or when an algorithm's files are unreadable/empty.
    """
    runs_by_algorithm = discover_runs(Path(input_dir))
    if not runs_by_algorithm:
        raise PlotDataError(
            f"no run CSVs found in {input_dir}; expected files like "
            + ", ".join(f"run_{a}_1.csv" for a in ALGORITHM_ORDER)
        )
    out: dict[str, tuple[list[int], list[float]]] = {}
    for algorithm in canonical_order(runs_by_algorithm):
        per_step: dict[int, list[float]] = {}
        for path in runs_by_algorithm[algorithm]:
            try:
                series = load_run(path)
            except (PlotDataError, OSError, ValueError) as exc:
                raise PlotDataError(f"algorithm {algorithm}: {exc}") from exc
            for step, value in zip(series.steps, series.values[column]):
                per_step.setdefault(step, []).append(value)
        steps = sorted(per_step)
        means = [sum(per_step[s]) / len(per_step[s]) for s in steps]
        out[algorithm] = (steps, means)
    return out


def moving_average(values, window: int) -> list[float]:
    """Trailing moving average with a growing head window (min periods 1)."""
    if window <= 1:
        return list(values)
    out = []
    acc = 0.0
    for i, v in enumerate(values):
        acc += v
        if i >= window:
            acc -= values[i - window]
        out.append(acc / min(i + 1, window))
    return out


def load_summary_means(summary_path: Path) -> dict[str, tuple[float, float, float]]:
    """Per-algorithm (mean_msp, mean_mrd, mean_mc) from summary.csv.

    Prefers the aggregate ``ALL`` rows; falls back to averaging the numeric
    iteration rows. Malformed content raises PlotDataError with the line
    number.
    """
    path = Path(summary_path)
    if not path.exists():
        raise PlotDataError(f"summary file not found: {path}")
    all_rows: dict[str, tuple[float, float, float]] = {}
    iter_rows: dict[str, list[tuple[float, float, float]]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if lineno == 1:
                if parts != SUMMARY_COLUMNS:
                    raise PlotDataError(
                        f"{path}:{lineno}: expected header "
                        f"{','.join(SUMMARY_COLUMNS)!r}, got {line!r}"
                    )
                continue
            if len(parts) != len(SUMMARY_COLUMNS):
                raise PlotDataError(
                    f"{path}:{lineno}: expected {len(SUMMARY_COLUMNS)} fields, "
                    f"got {len(parts)}"
                )
            algorithm, iteration = parts[0], parts[1]
            if iteration == "RANK":
                continue  # ranks are re-derived from the means when rendering
            try:
                triple = (float(parts[2]), float(parts[3]), float(parts[4]))
            except ValueError:
                raise PlotDataError(f"{path}:{lineno}: non-numeric metric value in {line!r}")
            if iteration == "ALL":
                all_rows[algorithm] = triple
            else:
                try:
                    int(iteration)
                except ValueError:
                    raise PlotDataError(
                        f"{path}:{lineno}: unrecognized iteration tag {iteration!r}"
                    )
                iter_rows.setdefault(algorithm, []).append(triple)
    if all_rows:
        return all_rows
    if not iter_rows:
        raise PlotDataError(f"{path}: no data rows found")
    return {
        alg: tuple(sum(col) / len(col) for col in zip(*rows))  # type: ignore[return-value]
        for alg, rows in iter_rows.items()
    }


def rank_algorithms(means: dict[str, tuple[float, float, float]]) -> dict[str, tuple[int, int, int]]:
    """Rank 1 (lowest mean, least misinformation) upward, per metric."""
    order = canonical_order(means)
    ranks = {a: [0, 0, 0] for a in means}
    for metric_idx in range(3):
        ordered = sorted(order, key=lambda a: (means[a][metric_idx], order.index(a)))
        for rank, algorithm in enumerate(ordered, start=1):
            ranks[algorithm][metric_idx] = rank
    return {a: (r[0], r[1], r[2]) for a, r in ranks.items()}
