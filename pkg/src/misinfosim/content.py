"""Content lifecycle: the item catalog, engagement decay, and evaluation scores.

Engagement follows initial * exp(-0.1 * age) plus a small decaying bump per
engage event; the bump is what lets an item go viral instead of fading
monotonically. An agent's probability of engaging an item combines the
item's evaluation score with a misinformation multiplier driven by naivety
and agent kind.
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from .domain import (
    AgentKind,
    AgentProfile,
    ContentItem,
    RandomSource,
    SimulationConfig,
)
from .netgen import cosine_similarity

__all__ = [
    "ContentCatalog",
    "seed_catalog",
    "engagement",
    "evaluate",
    "interaction_probability",
    "author_topic_vector",
    "DECAY_RATE",
    "EVALUATION_CAP",
    "FAKE_INITIAL_ENGAGEMENT",
    "REAL_INITIAL_ENGAGEMENT",
]

DECAY_RATE = 0.1
EVALUATION_CAP = 1.5
FAKE_INITIAL_ENGAGEMENT = 1.5
REAL_INITIAL_ENGAGEMENT = 1.0

# Multiplier applied to the engage probability of fake items, by agent kind:
# bots amplify readily, influencers are selective.
KIND_FAKE_FACTOR = {
    AgentKind.REGULAR: 1.0,
    AgentKind.BOT: 2.0,
    AgentKind.INFLUENCER: 0.3,
}

def initial_engagement_for(is_fake: bool) -> float:
    return FAKE_INITIAL_ENGAGEMENT if is_fake else REAL_INITIAL_ENGAGEMENT


class ContentCatalog:
    """All content items of a run, stored columnwise for fast bulk queries.

    Items are append-only and never deleted. The catalog also carries an
    exact accumulator of engage-event bumps per item so current engagement
    is an O(1) query: because every bump decays at the same rate, the sum
    of decayed bumps collapses to one (value, step) pair per item.
    """

    def __init__(self, topic_dim: int, engagement_bump: float = 0.1, capacity: int = 512):
        self.topic_dim = topic_dim
        self.engagement_bump = engagement_bump
        self._n = 0
        self._n_fake = 0
        self._is_fake = np.zeros(capacity, dtype=bool)
        self._topics = np.zeros((capacity, topic_dim), dtype=np.float64)
        self._initial = np.zeros(capacity, dtype=np.float64)
        self._created = np.zeros(capacity, dtype=np.int64)
        self._author = np.full(capacity, -1, dtype=np.int64)
        self._bump_value = np.zeros(capacity, dtype=np.float64)
        self._bump_step = np.zeros(capacity, dtype=np.int64)

    def __len__(self) -> int:
        return self._n

    @property
    def n_items(self) -> int:
        return self._n

    @property
    def n_fake(self) -> int:
        return self._n_fake

    def fake_fraction(self) -> float:
        if self._n == 0:
            raise ValueError("fake fraction is undefined for an empty catalog")
        return self._n_fake / self._n

    def _grow(self) -> None:
        cap = len(self._is_fake) * 2
        self._is_fake = np.resize(self._is_fake, cap)
        self._topics = np.resize(self._topics, (cap, self.topic_dim))
        self._initial = np.resize(self._initial, cap)
        self._created = np.resize(self._created, cap)
        self._author = np.resize(self._author, cap)
        self._bump_value = np.resize(self._bump_value, cap)
        self._bump_step = np.resize(self._bump_step, cap)

    def append(self, is_fake: bool, topic_vector: np.ndarray, creation_step: int,
               author: Optional[int] = None) -> int:
        if self._n == len(self._is_fake):
            self._grow()
        i = self._n
        self._is_fake[i] = is_fake
        self._topics[i] = topic_vector
        self._initial[i] = initial_engagement_for(is_fake)
        self._created[i] = creation_step
        self._author[i] = -1 if author is None else author
        self._bump_value[i] = 0.0
        self._bump_step[i] = creation_step
        self._n += 1
        if is_fake:
            self._n_fake += 1
        return i

    def item(self, item_id: int) -> ContentItem:
        if not 0 <= item_id < self._n:
            raise KeyError(f"unknown content id {item_id}")
        author = int(self._author[item_id])
        return ContentItem(
            id=item_id,
            is_fake=bool(self._is_fake[item_id]),
            topic_vector=self._topics[item_id].copy(),
            initial_engagement=float(self._initial[item_id]),
            creation_step=int(self._created[item_id]),
            author=None if author < 0 else author,
        )

    def items(self) -> list[ContentItem]:
        return [self.item(i) for i in range(self._n)]

    def author_of(self, item_id: int) -> int:
        """Author agent id, or -1 for seeded items."""
        return int(self._author[item_id])

    def is_fake(self, item_id: int) -> bool:
        return bool(self._is_fake[item_id])

    # Column views (read-only by convention), trimmed to the live length.
    @property
    def is_fake_view(self) -> np.ndarray:
        return self._is_fake[: self._n]

    @property
    def topics_view(self) -> np.ndarray:
        return self._topics[: self._n]

    @property
    def created_view(self) -> np.ndarray:
        return self._created[: self._n]

    @property
    def author_view(self) -> np.ndarray:
        return self._author[: self._n]

    def record_engagement(self, item_id: int, step: int) -> None:
        """Fold one engage event at ``step`` into the bump accumulator."""
        prev = self._bump_value[item_id]
        age = step - self._bump_step[item_id]
        if age < 0:
            raise ValueError("engage events must arrive in nondecreasing step order")
        self._bump_value[item_id] = prev * np.exp(-DECAY_RATE * age) + self.engagement_bump
        self._bump_step[item_id] = step

    def engagement(self, item_id: int, step: int) -> float:
        if step < self._created[item_id]:
            raise ValueError(
                f"engagement queried at step {step} before creation "
                f"step {int(self._created[item_id])}"
            )
        base = self._initial[item_id] * np.exp(-DECAY_RATE * (step - self._created[item_id]))
        bump = self._bump_value[item_id] * np.exp(-DECAY_RATE * (step - self._bump_step[item_id]))
        return float(base + bump)

    def engagement_array(self, item_ids: np.ndarray, step: int) -> np.ndarray:
        base = self._initial[item_ids] * np.exp(
            -DECAY_RATE * (step - self._created[item_ids])
        )
        bump = self._bump_value[item_ids] * np.exp(
            -DECAY_RATE * (step - self._bump_step[item_ids])
        )
        return base + bump

    def engagement_all(self, step: int) -> np.ndarray:
        return self.engagement_array(np.arange(self._n), step)

    def truncated(self, n_items: int) -> "ContentCatalog":
        """Static copy of the first ``n_items`` items with no bump state.

        Useful for replaying a historical step against the log-driven
        scoring functions, which compute engagement from events themselves.
        """
        out = ContentCatalog(self.topic_dim, self.engagement_bump, capacity=max(1, n_items))
        for i in range(n_items):
            author = int(self._author[i])
            out.append(
                bool(self._is_fake[i]),
                self._topics[i].copy(),
                int(self._created[i]),
                None if author < 0 else author,
            )
        return out


def seed_catalog(config: SimulationConfig, rng: RandomSource) -> ContentCatalog:
    """Build the initial content pool: ``initial_news`` items at step 0,
    round(initial_news * misinfo_pct) of them fake, topics uniform on the
    sphere, no author."""
    n = config.initial_news
    n_fake = round(n * config.misinfo_pct)
    fake_ids = set(int(i) for i in rng.choice(n, size=n_fake, replace=False)) if n_fake else set()

    vectors = rng.standard_normal((n, config.topic_dim))
    norms = np.linalg.norm(vectors, axis=1)
    while np.any(norms == 0.0):  # pragma: no cover - astronomically unlikely
        bad = norms == 0.0
        vectors[bad] = rng.standard_normal((int(bad.sum()), config.topic_dim))
        norms = np.linalg.norm(vectors, axis=1)
    vectors /= norms[:, None]

    catalog = ContentCatalog(config.topic_dim, config.engagement_bump, capacity=max(512, n))
    for i in range(n):
        catalog.append(i in fake_ids, vectors[i], creation_step=0, author=None)
    return catalog


def engagement(item: ContentItem, step: int, engage_steps: Iterable[int] = (),
               bump: float = 0.1) -> float:
    """Engagement score of ``item`` at ``step``.

    Closed form: initial * exp(-0.1 * age) plus, per engage event at step s,
    bump * exp(-0.1 * (step - s)).
    """
    if step < item.creation_step:
        raise ValueError(
            f"engagement queried at step {step} before creation step {item.creation_step}"
        )
    value = item.initial_engagement * np.exp(-DECAY_RATE * (step - item.creation_step))
    for s in engage_steps:
        if s > step:
            raise ValueError(f"engage event at step {s} is in the future of step {step}")
        value += bump * np.exp(-DECAY_RATE * (step - s))
    return float(value)


def evaluate(agent: AgentProfile, item: ContentItem, step: int,
             engage_steps: Iterable[int] = (), bump: float = 0.1) -> float:
    """Content evaluation: cos+(preference, topic) x credibility x engagement,
    with the engagement factor capped at 1.5. Always lies in [0, 1.5]."""
    cos = max(cosine_similarity(agent.preference_vector, item.topic_vector), 0.0)
    eng = min(engagement(item, step, engage_steps, bump), EVALUATION_CAP)
    return cos * agent.credibility * eng


def interaction_probability(agent: AgentProfile, item: ContentItem, step: int,
                            engage_steps: Iterable[int] = (), bump: float = 0.1) -> float:
    """Probability that ``agent`` engages ``item`` on scanning it this step.

    The evaluation score is normalized by the 1.5 cap; fake items are
    further scaled by (0.5 + naivety) and a kind factor, so naive agents
    and bots engage misinformation more readily while influencers rarely do.
    """
    base = evaluate(agent, item, step, engage_steps, bump) / EVALUATION_CAP
    if item.is_fake:
        base *= (0.5 + agent.naivety) * KIND_FAKE_FACTOR[agent.kind]
    return float(min(max(base, 0.0), 1.0))


def author_topic_vector(preference_vector: np.ndarray, rng: RandomSource,
                        noise: float = 0.5) -> np.ndarray:
    """Topic of a freshly authored item: the author's preferences plus noise."""
    noisy = preference_vector + noise * rng.standard_normal(len(preference_vector))
    norm = float(np.linalg.norm(noisy))
    if norm == 0.0:  # pragma: no cover - measure-zero event
        return preference_vector.copy()
    return noisy / norm
