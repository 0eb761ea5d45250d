"""The per-step simulation loop.

Each step runs six phases in a fixed order: activity draws, recommendation
computation against the frozen interaction snapshot, feed assembly,
interaction/authoring decisions, commit of the step's engage events, and
SEI state updates. All randomness for step t comes from one substream keyed
(run seed, t) and is consumed in ascending agent-id order within each
phase, so replays are bit-identical.
"""

from __future__ import annotations

from itertools import chain
from typing import Iterable, Optional

import numpy as np

from . import metrics
from .content import (
    EVALUATION_CAP,
    KIND_FAKE_FACTOR,
    author_topic_vector,
    seed_catalog,
)
from .domain import (
    AgentKind,
    AgentProfile,
    EpidemicState,
    InteractionKind,
    InteractionLog,
    InteractionRecord,
    RandomSource,
    SimulationConfig,
    validate_config,
)
from .metrics import StepMetricsRow
from .netgen import generate_agents, generate_graph
from .recsys import (
    ContentOrderCache,
    InteractionMatrix,
    ItemSimilarityIndex,
    PopularityIndex,
    UserSimilarityIndex,
    recommend_random,
)

__all__ = [
    "SimulationModel",
    "run",
    "is_active",
    "effective_activity",
    "assemble_feed",
    "transition",
]

# Substream tags for the run-level random source.
_STREAM_AGENTS = 1
_STREAM_GRAPH = 2
_STREAM_CATALOG = 3
_STREAM_STEP = 4


def effective_activity(agent: AgentProfile, step: int, steps_per_day: int = 24) -> float:
    """Per-step activation probability; doubled during the agent's peak
    offsets. Bots ignore peaks and always run at their base rate."""
    if agent.kind is AgentKind.BOT:
        return agent.activity_prob
    if (step % steps_per_day) in agent.peak_steps:
        return min(1.0, 2.0 * agent.activity_prob)
    return agent.activity_prob


def is_active(agent: AgentProfile, step: int, rng: RandomSource,
              steps_per_day: int = 24) -> bool:
    return float(rng.random()) < effective_activity(agent, step, steps_per_day)


def assemble_feed(current_feed: Iterable[int], shares_newest_first: Iterable[int],
                  recommendations: Iterable[int], cap: int) -> list[int]:
    """New feed, newest first: followee shares, then recommendations, then
    the previous feed; duplicates keep their freshest position; truncated
    to ``cap``."""
    out: list[int] = []
    seen: set[int] = set()
    for item in chain(shares_newest_first, recommendations, current_feed):
        if item in seen:
            continue
        seen.add(item)
        out.append(item)
        if len(out) == cap:
            break
    return out


def transition(state: EpidemicState, infected_since: Optional[int], step: int,
               engaged_fake: bool, feed_has_fake: bool,
               recovery_window: int) -> tuple[EpidemicState, Optional[int]]:
    """One SEI update for one agent at the end of ``step``.

    Infected agents are re-evaluated once the recovery window has elapsed:
    back to Exposed if their feed still carries misinformation, otherwise
    Susceptible. Engaging fake content (re-)infects from any non-infected
    state; exposure tracks the presence of fake items in the feed.
    """
    if state is EpidemicState.INFECTED and step - infected_since >= recovery_window:
        state = EpidemicState.EXPOSED if feed_has_fake else EpidemicState.SUSCEPTIBLE
        infected_since = None
    if engaged_fake and state is not EpidemicState.INFECTED:
        return EpidemicState.INFECTED, step
    if state is EpidemicState.SUSCEPTIBLE and feed_has_fake:
        return EpidemicState.EXPOSED, infected_since
    if state is EpidemicState.EXPOSED and not feed_has_fake:
        return EpidemicState.SUSCEPTIBLE, infected_since
    return state, infected_since


class SimulationModel:
    """One simulation run: population, graph, catalog, and the step loop."""

    def __init__(self, config: SimulationConfig):
        violations = [
            v for v in validate_config(config)
            # timesteps=0 is allowed here: it degenerates to an empty run.
            if not (config.timesteps == 0 and v.startswith("timesteps"))
        ]
        if violations:
            raise ValueError("invalid configuration: " + "; ".join(violations))
        self.config = config
        self.rng = RandomSource(config.rng_seed)
        self.agents = generate_agents(config, self.rng.substream(_STREAM_AGENTS))
        self.graph = generate_graph(self.agents, config, self.rng.substream(_STREAM_GRAPH))
        self.catalog = seed_catalog(config, self.rng.substream(_STREAM_CATALOG))
        self.log = InteractionLog()
        self.matrix = InteractionMatrix(config.n_users, capacity=config.initial_news + 512)
        self.matrix.ensure_items(self.catalog.n_items)
        self.step_index = 0
        self.last_recommendations: dict[int, list[int]] = {}
        self.last_active: list[int] = []

        n = config.n_users
        self._engaged: list[set[int]] = [set() for _ in range(n)]
        self._pending: list[list[int]] = [[] for _ in range(n)]
        self._feed_fake = np.zeros(n, dtype=np.int64)

        self._prefs = np.stack([a.preference_vector for a in self.agents])
        self._activity = np.array([a.activity_prob for a in self.agents])
        self._credibility = np.array([a.credibility for a in self.agents])
        self._post_prob = np.array([a.post_prob for a in self.agents])
        self._post_misinfo = np.array([a.post_misinfo_prob for a in self.agents])
        self._fake_mult = np.array(
            [(0.5 + a.naivety) * KIND_FAKE_FACTOR[a.kind] for a in self.agents]
        )
        self._is_bot = np.array([a.kind is AgentKind.BOT for a in self.agents])
        spd = config.steps_per_day
        self._peak = np.zeros((spd, n), dtype=bool)
        for a in self.agents:
            for off in a.peak_steps:
                self._peak[off % spd, a.id] = True

        alg = config.algorithm
        self._pop_index = PopularityIndex(self.catalog, config.popularity_window) \
            if alg == "popularity" else None
        self._user_index = UserSimilarityIndex(n) if alg == "user_knn" else None
        self._item_index = ItemSimilarityIndex(config.knn_neighbors) \
            if alg == "item_knn" else None
        self._content_cache = ContentOrderCache(self.catalog) \
            if alg == "content_based" else None

    # -- per-step phases ----------------------------------------------------

    def _active_agents(self, step: int, step_rng: RandomSource) -> list[int]:
        offset = step % self.config.steps_per_day
        boosted = self._peak[offset] & ~self._is_bot
        p_eff = np.where(boosted, np.minimum(1.0, 2.0 * self._activity), self._activity)
        draws = step_rng.random(self.config.n_users)
        return [int(i) for i in np.flatnonzero(draws < p_eff)]

    def _recommend(self, agent_id: int, step: int, n: int,
                   step_rng: RandomSource) -> list[int]:
        alg = self.config.algorithm
        engaged = self._engaged[agent_id]
        author_view = self.catalog.author_view

        if alg in ("user_knn", "item_knn") and (
            self.matrix.user_count(agent_id) < self.config.cold_start_min_interactions
        ):
            alg = "random"  # cold start falls back to the uniform baseline

        if alg == "random":
            return recommend_random(agent_id, self.catalog, n, step_rng, engaged)
        if alg == "popularity":
            return self._pop_index.recommend(agent_id, engaged, author_view, n)
        if alg == "content_based":
            return self._content_cache.recommend(
                self.agents[agent_id], engaged, author_view, n)
        if alg == "user_knn":
            nbr_ids, nbr_sims = self._user_index.neighbors(
                agent_id, self.config.knn_neighbors)
            if len(nbr_ids) == 0:
                return []
            rows = self.matrix.dense()[nbr_ids]
            scores = (nbr_sims[:, None] * rows).sum(axis=0)
            return self._rank_positive(np.arange(len(scores)), scores,
                                       agent_id, engaged, author_view, n)
        if alg == "item_knn":
            ids, scores = self._item_index.scores(agent_id)
            return self._rank_positive(ids, scores, agent_id, engaged, author_view, n)
        raise AssertionError(f"unhandled algorithm {alg!r}")

    @staticmethod
    def _rank_positive(ids: np.ndarray, scores: np.ndarray, agent_id: int,
                       engaged: set[int], author_view: np.ndarray, n: int) -> list[int]:
        pos = np.flatnonzero(scores > 0.0)
        if len(pos) == 0:
            return []
        order = pos[np.lexsort((ids[pos], -scores[pos]))]
        out: list[int] = []
        for idx in order:
            item = int(ids[idx])
            if item in engaged or author_view[item] == agent_id:
                continue
            out.append(item)
            if len(out) == n:
                break
        return out

    def _interaction_probs(self, agent_id: int, items: np.ndarray,
                           step: int) -> np.ndarray:
        cos = (self.catalog.topics_view[items] * self._prefs[agent_id]).sum(axis=1)
        np.maximum(cos, 0.0, out=cos)
        eng = np.minimum(self.catalog.engagement_array(items, step), EVALUATION_CAP)
        base = cos * (self._credibility[agent_id] / EVALUATION_CAP) * eng
        p = np.where(self.catalog.is_fake_view[items],
                     base * self._fake_mult[agent_id], base)
        return np.clip(p, 0.0, 1.0)

    def step(self) -> StepMetricsRow:
        cfg = self.config
        t = self.step_index + 1
        step_rng = self.rng.substream(_STREAM_STEP, t)

        active = self._active_agents(t, step_rng)
        self.last_active = active

        if self._pop_index is not None:
            self._pop_index.prepare(t)
        rec_record: dict[int, list[int]] = {}
        for u in active:
            rec_record[u] = self._recommend(u, t, cfg.recs_per_step, step_rng)
        self.last_recommendations = rec_record

        for u in active:
            agent = self.agents[u]
            shares = list(reversed(self._pending[u]))
            self._pending[u].clear()
            agent.feed = assemble_feed(agent.feed, shares, rec_record[u], cfg.feed_cap)
            if agent.feed:
                feed_arr = np.asarray(agent.feed)
                self._feed_fake[u] = int(self.catalog.is_fake_view[feed_arr].sum())
            else:
                self._feed_fake[u] = 0

        step_events: list[tuple[int, int]] = []
        engaged_fake: set[int] = set()
        followers = self.graph.followers
        for u in active:
            agent = self.agents[u]
            feed = agent.feed
            if feed:
                items = np.asarray(feed)
                p = self._interaction_probs(u, items, t)
                engaged_set = self._engaged[u]
                already = np.fromiter((i in engaged_set for i in feed), dtype=bool,
                                      count=len(feed))
                p[already] = 0.0  # re-engagement is a no-op
                hits = step_rng.random(len(feed)) < p
                for item in items[hits]:
                    item = int(item)
                    self.log.append(InteractionRecord(u, item, t, InteractionKind.ENGAGE))
                    engaged_set.add(item)
                    step_events.append((u, item))
                    if self.catalog.is_fake(item):
                        engaged_fake.add(u)
                    for f in followers(u):
                        self._pending[f].append(item)
            if float(step_rng.random()) < self._post_prob[u]:
                fake = float(step_rng.random()) < self._post_misinfo[u]
                topic = author_topic_vector(agent.preference_vector, step_rng,
                                            cfg.author_topic_noise)
                new_id = self.catalog.append(fake, topic, creation_step=t, author=u)
                for f in followers(u):
                    self._pending[f].append(new_id)

        # Commit: the interaction snapshot stays frozen until the step ends.
        self.matrix.ensure_items(self.catalog.n_items)
        for u, item in step_events:
            self.matrix.add(u, item)
            self.catalog.record_engagement(item, t)
        if self._pop_index is not None:
            self._pop_index.commit_step(t, [item for _, item in step_events])
        if self._user_index is not None:
            for u, item in step_events:
                self._user_index.commit_event(u, item)
        if self._item_index is not None:
            self._item_index.commit_step(step_events)

        for agent in self.agents:
            agent.state, agent.infected_since = transition(
                agent.state, agent.infected_since, t,
                agent.id in engaged_fake, self._feed_fake[agent.id] > 0,
                cfg.infection_recovery_window,
            )

        n_s = n_e = n_i = 0
        for agent in self.agents:
            if agent.state is EpidemicState.SUSCEPTIBLE:
                n_s += 1
            elif agent.state is EpidemicState.EXPOSED:
                n_e += 1
            else:
                n_i += 1
        assert n_s + n_e + n_i == cfg.n_users

        recommended = list(chain.from_iterable(rec_record.values()))
        row = StepMetricsRow(
            step=t,
            n_susceptible=n_s,
            n_exposed=n_e,
            n_infected=n_i,
            msp=metrics.msp(self.agents),
            mrd=metrics.mrd(recommended, self.catalog),
            mc=metrics.mc(rec_record, self.catalog),
            n_contents=self.catalog.n_items,
            n_fake_contents=self.catalog.n_fake,
            n_interactions_step=len(step_events),
        )
        self.step_index = t
        return row

    def run(self) -> list[StepMetricsRow]:
        return [self.step() for _ in range(self.config.timesteps)]


def run(config: SimulationConfig) -> tuple[SimulationModel, list[StepMetricsRow]]:
    """Build a model from ``config`` and run it for ``config.timesteps`` steps."""
    model = SimulationModel(config)
    rows = model.run()
    return model, rows
