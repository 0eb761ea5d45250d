"""Agent population and follow-graph generation.

The directed follow graph stores an edge u -> v when u follows v, so v's
shares reach u. Topology reflects preference similarity (users follow
like-minded users), a strong influencer boost, and damped bot reach.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from .domain import (
    AgentKind,
    AgentProfile,
    EpidemicState,
    RandomSource,
    SimulationConfig,
    sample_unit_vector,
)

__all__ = [
    "SocialGraph",
    "generate_agents",
    "generate_graph",
    "cosine_similarity",
    "export_edge_list",
]

# Sampling ranges per agent kind: (activity low, high), (naivety low, high).
ACTIVITY_RANGES = {
    AgentKind.REGULAR: (0.1, 0.7),
    AgentKind.BOT: (0.4, 0.9),
    AgentKind.INFLUENCER: (0.3, 0.8),
}
NAIVETY_RANGES = {
    AgentKind.REGULAR: (0.3, 0.6),
    AgentKind.BOT: (0.6, 0.9),
    AgentKind.INFLUENCER: (0.3, 0.6),
}

# Followee-selection weight multipliers. The influencer boost targets the
# roughly-20x follower advantage; bots end up with fewer followers than
# regular users.
KIND_BOOST = {
    AgentKind.REGULAR: 1.0,
    AgentKind.BOT: 0.5,
    AgentKind.INFLUENCER: 20.0,
}

# Floor for follow weights so antipodal preference pairs stay reachable and
# the weighted sampler always has positive mass.
WEIGHT_FLOOR = 0.01

N_INFLUENCER_PEAKS = 2


class SocialGraph:
    """Directed follow graph, immutable after construction.

    ``followers(v)`` returns who follows v (i.e. who receives v's shares);
    ``followees(u)`` returns who u follows. Both are O(degree) lookups
    against prebuilt adjacency lists.
    """

    def __init__(self, n: int, edges: list[tuple[int, int]]):
        self.n = n
        seen = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at agent {u}")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge {u}->{v}")
            seen.add((u, v))
        self.edges = sorted(edges)
        self._followees: list[list[int]] = [[] for _ in range(n)]
        self._followers: list[list[int]] = [[] for _ in range(n)]
        for u, v in self.edges:
            self._followees[u].append(v)
            self._followers[v].append(u)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def followers(self, v: int) -> list[int]:
        return self._followers[v]

    def followees(self, u: int) -> list[int]:
        return self._followees[u]

    def in_degrees(self) -> np.ndarray:
        return np.array([len(f) for f in self._followers], dtype=np.int64)

    def out_degrees(self) -> np.ndarray:
        return np.array([len(f) for f in self._followees], dtype=np.int64)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors, in [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity is undefined for zero vectors")
    return float(np.dot(a, b)) / (na * nb)


def _kind_counts(config: SimulationConfig) -> tuple[int, int, int]:
    n = config.n_users
    n_bots = round(n * config.bot_pct)
    n_influencers = round(n * config.influencer_pct)
    n_regular = n - n_bots - n_influencers
    return n_regular, n_bots, n_influencers


def generate_agents(config: SimulationConfig, rng: RandomSource) -> list[AgentProfile]:
    """Create the agent population: regular users first, then bots, then influencers.

    Kind counts are round(n * pct) with the regular block absorbing the
    rounding remainder. Every agent starts Susceptible with an empty feed.
    Influencers post at the globally busiest times: their peak offsets are
    the most common offsets across the regular population.
    """
    n_regular, n_bots, n_influencers = _kind_counts(config)
    kinds = (
        [AgentKind.REGULAR] * n_regular
        + [AgentKind.BOT] * n_bots
        + [AgentKind.INFLUENCER] * n_influencers
    )

    agents: list[AgentProfile] = []
    peak_counter: Counter[int] = Counter()
    for agent_id, kind in enumerate(kinds):
        a_lo, a_hi = ACTIVITY_RANGES[kind]
        n_lo, n_hi = NAIVETY_RANGES[kind]
        activity = float(rng.uniform(a_lo, a_hi))
        naivety = float(rng.uniform(n_lo, n_hi))
        credibility = min(1.0, max(1e-9, 1.0 - 0.5 * naivety))
        pref = sample_unit_vector(config.topic_dim, rng)

        if kind is AgentKind.REGULAR:
            n_peaks = int(rng.integers(1, 4))
            offsets = rng.choice(config.steps_per_day, size=n_peaks, replace=False)
            peaks = frozenset(int(o) for o in offsets)
            peak_counter.update(peaks)
        else:
            # Bots run at a constant rate; influencer peaks are assigned below.
            peaks = frozenset()

        agents.append(
            AgentProfile(
                id=agent_id,
                kind=kind,
                activity_prob=activity,
                naivety=naivety,
                credibility=credibility,
                post_prob=config.post_prob_for(kind),
                post_misinfo_prob=config.post_misinfo_for(kind),
                preference_vector=pref,
                peak_steps=peaks,
                state=EpidemicState.SUSCEPTIBLE,
            )
        )

    if peak_counter:
        busiest = sorted(peak_counter.items(), key=lambda kv: (-kv[1], kv[0]))
        influencer_peaks = frozenset(o for o, _ in busiest[:N_INFLUENCER_PEAKS])
    else:
        influencer_peaks = frozenset({0})
    for agent in agents:
        if agent.kind is AgentKind.INFLUENCER:
            agent.peak_steps = influencer_peaks

    return agents


def generate_graph(
    agents: list[AgentProfile], config: SimulationConfig, rng: RandomSource
) -> SocialGraph:
    """Sample the follow graph.

    Each agent u draws an out-degree from Poisson(avg_followers), clamped to
    [1, n-1], then picks that many distinct followees by weighted sampling
    without replacement with weight(v) = max(cos(pref_u, pref_v), 0.01) *
    kind_boost(v).
    """
    n = len(agents)
    if n < 2:
        raise ValueError(f"graph generation needs at least 2 agents, got {n}")

    prefs = np.stack([a.preference_vector for a in agents])
    # einsum keeps the reduction single-threaded and bit-stable.
    cos = np.einsum("it,jt->ij", prefs, prefs)
    boost = np.array([KIND_BOOST[a.kind] for a in agents], dtype=np.float64)
    weights = np.maximum(cos, WEIGHT_FLOOR) * boost[None, :]

    edges: list[tuple[int, int]] = []
    ids = np.arange(n)
    for u in range(n):
        d = rng.poisson_knuth(config.avg_followers)
        d = max(1, min(d, n - 1))
        mask = ids != u
        candidates = ids[mask]
        w = weights[u, mask]
        p = w / w.sum()
        followees = rng.choice(candidates, size=d, replace=False, p=p)
        edges.extend((u, int(v)) for v in followees)

    return SocialGraph(n, edges)


def export_edge_list(graph: SocialGraph, path) -> None:
    """Write one ``follower_id followee_id`` pair per line, sorted."""
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in graph.edges:
            fh.write(f"{u} {v}\n")
