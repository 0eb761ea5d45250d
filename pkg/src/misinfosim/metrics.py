"""Per-step and per-run measurements of misinformation spread.

Three quantities drive the analysis: MSP, the percentage of agents in the
Infected state; MRD, the fake fraction among recommended items minus the
fake fraction of the whole catalog (positive means the recommender
over-recommends misinformation); and MC, the average count of fake items
in an agent's recommendation list.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .content import ContentCatalog
from .domain import AgentProfile, EpidemicState

__all__ = ["StepMetricsRow", "RunSummary", "msp", "mrd", "mc", "summarize", "assign_ranks"]


@dataclass(frozen=True)
class StepMetricsRow:
    step: int
    n_susceptible: int
    n_exposed: int
    n_infected: int
    msp: float
    mrd: float
    mc: float
    n_contents: int
    n_fake_contents: int
    n_interactions_step: int


@dataclass
class RunSummary:
    """Arithmetic means of the per-step metrics for one (algorithm, iteration) run."""

    algorithm: str
    iteration: int
    mean_msp: float
    mean_mrd: float
    mean_mc: float
    rank_msp: Optional[int] = None
    rank_mrd: Optional[int] = None
    rank_mc: Optional[int] = None


def msp(agents: Sequence[AgentProfile]) -> float:
    """Misinformation spread: percentage of agents currently Infected."""
    if not agents:
        raise ValueError("msp is undefined for an empty population")
    infected = sum(1 for a in agents if a.state is EpidemicState.INFECTED)
    return 100.0 * infected / len(agents)


def mrd(recommended: Sequence[int], catalog: ContentCatalog) -> float:
    """Misinformation ratio difference for one step.

    ``recommended`` is the multiset of all content ids recommended this step
    (an item recommended to two agents counts twice). Steps with no
    recommendations record 0.
    """
    if catalog.n_items == 0:
        raise ValueError("mrd is undefined for an empty catalog")
    if not recommended:
        return 0.0
    fake = sum(1 for i in recommended if catalog.is_fake(i))
    return fake / len(recommended) - catalog.fake_fraction()


def mc(per_agent_recommendations: Mapping[int, Sequence[int]],
       catalog: ContentCatalog) -> float:
    """Mean count of fake items per recommendation list.

    Averages over agents that received a nonempty list this step; 0 when no
    agent received recommendations.
    """
    counts = [
        sum(1 for i in items if catalog.is_fake(i))
        for items in per_agent_recommendations.values()
        if len(items) > 0
    ]
    if not counts:
        return 0.0
    return sum(counts) / len(counts)


def summarize(rows: Iterable[StepMetricsRow], algorithm: str, iteration: int) -> RunSummary:
    rows = list(rows)
    if not rows:
        raise ValueError("cannot summarize an empty run")
    n = len(rows)
    return RunSummary(
        algorithm=algorithm,
        iteration=iteration,
        mean_msp=sum(r.msp for r in rows) / n,
        mean_mrd=sum(r.mrd for r in rows) / n,
        mean_mc=sum(r.mc for r in rows) / n,
    )


def assign_ranks(per_algorithm_means: Mapping[str, tuple[float, float, float]],
                 algorithm_order: Sequence[str]) -> dict[str, tuple[int, int, int]]:
    """Rank algorithms 1 (lowest mean, least misinformation) to worst per metric.

    Ties resolve by the given canonical algorithm order so ranks are always
    a permutation of 1..n.
    """
    ranks: dict[str, list[int]] = {a: [0, 0, 0] for a in per_algorithm_means}
    canon = {a: i for i, a in enumerate(algorithm_order)}
    for metric_idx in range(3):
        ordered = sorted(
            per_algorithm_means,
            key=lambda a: (per_algorithm_means[a][metric_idx], canon.get(a, len(canon))),
        )
        for rank, alg in enumerate(ordered, start=1):
            ranks[alg][metric_idx] = rank
    return {a: (r[0], r[1], r[2]) for a, r in ranks.items()}
