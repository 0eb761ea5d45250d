"""Command-line batch runner: algorithms x iterations, CSV outputs.

Each (algorithm, iteration) pair becomes one independent simulation run
whose seed derives from (base seed, algorithm index, iteration) through a
stable 64-bit mix, so adding algorithms or reordering execution never
perturbs other runs. Runs may execute in parallel; outputs are identical
to serial execution.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Sequence

from .domain import ALGORITHMS, SimulationConfig, mix64, validate_config
from .engine import run as run_simulation
from .metrics import RunSummary, StepMetricsRow, assign_ranks, summarize

__all__ = ["BatchPlan", "parse_cli", "run_batch", "main", "CSV_HEADER"]

CSV_HEADER = (
    "run_id,algorithm,iteration,step,n_susceptible,n_exposed,n_infected,"
    "msp,mrd,mc,n_contents,n_fake_contents,n_interactions_step"
)
SUMMARY_HEADER = "algorithm,iteration,mean_msp,mean_mrd,mean_mc"


@dataclass
class BatchPlan:
    config: SimulationConfig
    algorithms: tuple[str, ...] = ALGORITHMS
    iterations: int = 5
    base_seed: int = 0
    out_dir: Path = Path("results")
    jobs: int = 0  # 0 -> use all available cores

    def run_seed(self, algorithm: str, iteration: int) -> int:
        return mix64(self.base_seed, ALGORITHMS.index(algorithm), iteration)

    def runs(self) -> list[tuple[str, int, int]]:
        """(algorithm, iteration, seed) triples in canonical order."""
        out = [
            (alg, it, self.run_seed(alg, it))
            for alg in self.algorithms
            for it in range(1, self.iterations + 1)
        ]
        seeds = [s for _, _, s in out]
        if len(set(seeds)) != len(seeds):  # pragma: no cover - 2^-64 territory
            raise RuntimeError("derived run seeds collided; change the base seed")
        return out


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def write_run_csv(path: Path, algorithm: str, iteration: int,
                  rows: Sequence[StepMetricsRow]) -> None:
    run_id = f"{algorithm}_{iteration}"
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{run_id},{algorithm},{iteration},{r.step},"
            f"{r.n_susceptible},{r.n_exposed},{r.n_infected},"
            f"{_fmt(r.msp)},{_fmt(r.mrd)},{_fmt(r.mc)},"
            f"{r.n_contents},{r.n_fake_contents},{r.n_interactions_step}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summary_csv(path: Path, summaries: Sequence[RunSummary],
                      algorithms: Sequence[str]) -> None:
    """Per-run rows, then per-algorithm ALL rows, then a RANK block.

    RANK rows reuse the three metric columns to carry each algorithm's rank
    (1 = lowest mean = least misinformation) as integers.
    """
    lines = [SUMMARY_HEADER]
    for s in summaries:
        lines.append(
            f"{s.algorithm},{s.iteration},{_fmt(s.mean_msp)},"
            f"{_fmt(s.mean_mrd)},{_fmt(s.mean_mc)}"
        )
    means: dict[str, tuple[float, float, float]] = {}
    for alg in algorithms:
        runs = [s for s in summaries if s.algorithm == alg]
        means[alg] = (
            sum(s.mean_msp for s in runs) / len(runs),
            sum(s.mean_mrd for s in runs) / len(runs),
            sum(s.mean_mc for s in runs) / len(runs),
        )
        lines.append(
            f"{alg},ALL,{_fmt(means[alg][0])},{_fmt(means[alg][1])},{_fmt(means[alg][2])}"
        )
    ranks = assign_ranks(means, ALGORITHMS)
    for alg in algorithms:
        r = ranks[alg]
        lines.append(f"{alg},RANK,{r[0]},{r[1]},{r[2]}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _execute_run(args: tuple[str, int, int, SimulationConfig, str]) -> RunSummary:
    algorithm, iteration, seed, base_config, out_dir = args
    config = base_config.with_overrides(algorithm=algorithm, rng_seed=seed)
    _, rows = run_simulation(config)
    write_run_csv(Path(out_dir) / f"run_{algorithm}_{iteration}.csv",
                  algorithm, iteration, rows)
    return summarize(rows, algorithm, iteration)


def run_batch(plan: BatchPlan) -> list[RunSummary]:
    violations = validate_config(plan.config)
    if violations:
        raise ValueError("invalid configuration: " + "; ".join(violations))
    out_dir = Path(plan.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    probe = out_dir / ".write_probe"
    try:
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {out_dir} is not writable: {exc}") from exc

    tasks = [
        (alg, it, seed, plan.config, str(out_dir))
        for alg, it, seed in plan.runs()
    ]
    jobs = plan.jobs if plan.jobs > 0 else (os.cpu_count() or 1)
    jobs = min(jobs, len(tasks))
    if jobs <= 1:
        summaries = [_execute_run(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(_execute_run, tasks))
    # map() preserves task order, which is already canonical.
    write_summary_csv(out_dir / "summary.csv", summaries, plan.algorithms)
    return summaries


# Simulation-level keys accepted in --config files in addition to the CLI
# flag names below.
_CONFIG_FILE_EXTRA_KEYS = {f.name for f in fields(SimulationConfig)}


def _parse_config_file(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


_FLAG_SPECS: list[tuple[str, str, type]] = [
    # (flag key, SimulationConfig field or plan attribute, type)
    ("steps", "timesteps", int),
    ("users", "n_users", int),
    ("avg_followers", "avg_followers", float),
    ("initial_news", "initial_news", int),
    ("misinfo_pct", "misinfo_pct", float),
    ("bot_pct", "bot_pct", float),
    ("influencer_pct", "influencer_pct", float),
    ("recs_per_step", "recs_per_step", int),
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="misinfosim",
        description="Run the misinformation-spread simulation batch and write CSV metrics.",
    )
    parser.add_argument("--algorithm", default="all",
                        help="one of %s, or 'all'" % "|".join(ALGORITHMS))
    parser.add_argument("--steps", type=int, default=None, help="timesteps per run (600)")
    parser.add_argument("--users", type=int, default=None, help="number of agents (200)")
    parser.add_argument("--avg-followers", type=float, default=None, dest="avg_followers")
    parser.add_argument("--initial-news", type=int, default=None, dest="initial_news")
    parser.add_argument("--misinfo-pct", type=float, default=None, dest="misinfo_pct")
    parser.add_argument("--bot-pct", type=float, default=None, dest="bot_pct")
    parser.add_argument("--influencer-pct", type=float, default=None, dest="influencer_pct")
    parser.add_argument("--recs-per-step", type=int, default=None, dest="recs_per_step")
    parser.add_argument("--iterations", type=int, default=None, help="runs per algorithm (5)")
    parser.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    parser.add_argument("--out", default=None, help="output directory (default results/)")
    parser.add_argument("--config", default=None,
                        help="key=value file; command-line flags override it")
    parser.add_argument("--jobs", type=int, default=None,
                        help="max concurrent runs (default: all cores)")
    return parser


def parse_cli(argv: Optional[Sequence[str]] = None) -> BatchPlan:
    parser = build_parser()
    args = parser.parse_args(argv)

    file_values: dict[str, str] = {}
    if args.config is not None:
        path = Path(args.config)
        if not path.exists():
            parser.error(f"config file not found: {path}")
        try:
            file_values = _parse_config_file(path)
        except ValueError as exc:
            parser.error(str(exc))

    config_kwargs: dict = {}
    plan_kwargs: dict = {}

    def take_file(key: str, caster, into: dict, dest: Optional[str] = None) -> None:
        if key in file_values:
            try:
                into[dest or key] = caster(file_values.pop(key))
            except ValueError:
                parser.error(f"config file value for {key!r} is not a valid {caster.__name__}")

    for key, config_field, caster in _FLAG_SPECS:
        take_file(key, caster, config_kwargs, config_field)
    take_file("iterations", int, plan_kwargs)
    take_file("seed", int, plan_kwargs, "base_seed")
    take_file("out", str, plan_kwargs, "out_dir")
    take_file("jobs", int, plan_kwargs)
    take_file("algorithm", str, plan_kwargs)
    for key in list(file_values):
        if key in _CONFIG_FILE_EXTRA_KEYS:
            current = getattr(SimulationConfig(), key)
            caster = type(current) if not isinstance(current, bool) else (
                lambda s: s.lower() in ("1", "true", "yes"))
            take_file(key, caster, config_kwargs)
    if file_values:
        parser.error(f"unknown config file keys: {', '.join(sorted(file_values))}")

    for key, config_field, _ in _FLAG_SPECS:
        value = getattr(args, key)
        if value is not None:
            config_kwargs[config_field] = value
    if args.iterations is not None:
        plan_kwargs["iterations"] = args.iterations
    if args.seed is not None:
        plan_kwargs["base_seed"] = args.seed
    if args.out is not None:
        plan_kwargs["out_dir"] = args.out
    if args.jobs is not None:
        plan_kwargs["jobs"] = args.jobs
    if args.algorithm != "all" or "algorithm" not in plan_kwargs:
        plan_kwargs["algorithm"] = args.algorithm

    algorithm = plan_kwargs.pop("algorithm")
    if algorithm == "all":
        algorithms: tuple[str, ...] = ALGORITHMS
    elif algorithm in ALGORITHMS:
        algorithms = (algorithm,)
    else:
        parser.error(f"unknown algorithm {algorithm!r}; expected one of "
                     f"{', '.join(ALGORITHMS)} or 'all'")

    config = SimulationConfig(**config_kwargs)
    violations = validate_config(config)
    if violations:
        parser.error("invalid configuration: " + "; ".join(violations))

    iterations = plan_kwargs.get("iterations", 5)
    if iterations < 1:
        parser.error(f"iterations must be >= 1, got {iterations}")
    base_seed = plan_kwargs.get("base_seed", 0)
    if not 0 <= base_seed < 2 ** 64:
        parser.error(f"seed must be in [0, 2^64), got {base_seed}")

    return BatchPlan(
        config=config,
        algorithms=algorithms,
        iterations=iterations,
        base_seed=base_seed,
        out_dir=Path(plan_kwargs.get("out_dir", "results")),
        jobs=plan_kwargs.get("jobs", 0),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    plan = parse_cli(argv)
    try:
        summaries = run_batch(plan)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(summaries)} runs and summary.csv to {plan.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
