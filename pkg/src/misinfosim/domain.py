"""Core data types, configuration validation, and the seeded random source.

Everything downstream (network generation, content dynamics, recommenders,
the step engine) builds on the types defined here. All randomness flows
through :class:`RandomSource`, a thin wrapper around numpy's Philox 4x64
counter-based generator, so that a single 64-bit seed fully determines a
simulation run.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

__all__ = [
    "AgentKind",
    "EpidemicState",
    "InteractionKind",
    "AgentProfile",
    "ContentItem",
    "InteractionRecord",
    "InteractionLog",
    "SimulationConfig",
    "RandomSource",
    "ALGORITHMS",
    "mix64",
    "validate_config",
    "sample_unit_vector",
]


class AgentKind(Enum):
    REGULAR = "regular"
    BOT = "bot"
    INFLUENCER = "influencer"


class EpidemicState(Enum):
    SUSCEPTIBLE = "susceptible"
    EXPOSED = "exposed"
    INFECTED = "infected"


class InteractionKind(Enum):
    VIEW = "view"
    ENGAGE = "engage"


ALGORITHMS = ("random", "popularity", "user_knn", "item_knn", "content_based")


@dataclass
class AgentProfile:
    """One network participant.

    ``state``, ``infected_since`` and ``feed`` are the only mutable fields;
    they are touched exclusively by the simulation engine. ``feed`` holds
    content ids, newest first, and never exceeds the configured cap at the
    end of a step.
    """

    id: int
    kind: AgentKind
    activity_prob: float
    naivety: float
    credibility: float
    post_prob: float
    post_misinfo_prob: float
    preference_vector: np.ndarray
    peak_steps: frozenset[int]
    state: EpidemicState = EpidemicState.SUSCEPTIBLE
    infected_since: Optional[int] = None
    feed: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "activity_prob": self.activity_prob,
            "naivety": self.naivety,
            "credibility": self.credibility,
            "post_prob": self.post_prob,
            "post_misinfo_prob": self.post_misinfo_prob,
            "preference_vector": [float(x) for x in self.preference_vector],
            "peak_steps": sorted(self.peak_steps),
            "state": self.state.value,
            "infected_since": self.infected_since,
            "feed": list(self.feed),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AgentProfile":
        return cls(
            id=d["id"],
            kind=AgentKind(d["kind"]),
            activity_prob=d["activity_prob"],
            naivety=d["naivety"],
            credibility=d["credibility"],
            post_prob=d["post_prob"],
            post_misinfo_prob=d["post_misinfo_prob"],
            preference_vector=np.asarray(d["preference_vector"], dtype=np.float64),
            peak_steps=frozenset(d["peak_steps"]),
            state=EpidemicState(d["state"]),
            infected_since=d["infected_since"],
            feed=list(d["feed"]),
        )


@dataclass(frozen=True)
class ContentItem:
    """One news item. ``initial_engagement`` is 1.5 for fake items, 1.0 otherwise."""

    id: int
    is_fake: bool
    topic_vector: np.ndarray
    initial_engagement: float
    creation_step: int
    author: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "is_fake": self.is_fake,
            "topic_vector": [float(x) for x in self.topic_vector],
            "initial_engagement": self.initial_engagement,
            "creation_step": self.creation_step,
            "author": self.author,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ContentItem":
        return cls(
            id=d["id"],
            is_fake=d["is_fake"],
            topic_vector=np.asarray(d["topic_vector"], dtype=np.float64),
            initial_engagement=d["initial_engagement"],
            creation_step=d["creation_step"],
            author=d["author"],
        )


@dataclass(frozen=True)
class InteractionRecord:
    agent_id: int
    content_id: int
    step: int
    kind: InteractionKind


class InteractionLog:
    """Append-only record of interaction events.

    Steps must be nondecreasing in append order, and an Engage for a given
    (agent, item) pair is recorded at most once; re-engagement attempts are
    idempotent (``append`` returns False and records nothing).
    """

    def __init__(self) -> None:
        self._records: list[InteractionRecord] = []
        self._engaged: set[tuple[int, int]] = set()
        self._last_step = -1

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    def append(self, record: InteractionRecord) -> bool:
        if record.step < self._last_step:
            raise ValueError(
                f"log steps must be nondecreasing: got {record.step} after {self._last_step}"
            )
        if record.kind is InteractionKind.ENGAGE:
            key = (record.agent_id, record.content_id)
            if key in self._engaged:
                return False
            self._engaged.add(key)
        self._records.append(record)
        self._last_step = record.step
        return True

    def has_engaged(self, agent_id: int, content_id: int) -> bool:
        return (agent_id, content_id) in self._engaged

    def engage_records(self) -> list[InteractionRecord]:
        return [r for r in self._records if r.kind is InteractionKind.ENGAGE]


@dataclass(frozen=True)
class SimulationConfig:
    """Full parameterization of one simulation run.

    The first block mirrors the experiment defaults (600 steps, 200 users,
    10% misinformation, ...); the second block holds artifact-level knobs
    such as the topic-space dimension and the collaborative-filtering
    neighborhood size.
    """

    timesteps: int = 600
    n_users: int = 200
    avg_followers: float = 6.0
    initial_news: int = 400
    misinfo_pct: float = 0.10
    bot_pct: float = 0.07
    influencer_pct: float = 0.03
    recs_per_step: int = 10
    algorithm: str = "random"
    rng_seed: int = 0

    topic_dim: int = 32
    feed_cap: int = 10
    steps_per_day: int = 24
    infection_recovery_window: int = 40
    knn_neighbors: int = 10
    popularity_window: int = 5
    cold_start_min_interactions: int = 10
    engagement_bump: float = 0.1
    author_topic_noise: float = 0.5

    # Authoring behavior per agent kind. Bots post often and mostly fake;
    # influencers post selectively.
    post_prob_regular: float = 0.05
    post_prob_bot: float = 0.15
    post_prob_influencer: float = 0.10
    post_misinfo_regular: float = 0.10
    post_misinfo_bot: float = 0.60
    post_misinfo_influencer: float = 0.02

    def with_overrides(self, **kwargs) -> "SimulationConfig":
        return replace(self, **kwargs)

    def post_prob_for(self, kind: AgentKind) -> float:
        return {
            AgentKind.REGULAR: self.post_prob_regular,
            AgentKind.BOT: self.post_prob_bot,
            AgentKind.INFLUENCER: self.post_prob_influencer,
        }[kind]

    def post_misinfo_for(self, kind: AgentKind) -> float:
        return {
            AgentKind.REGULAR: self.post_misinfo_regular,
            AgentKind.BOT: self.post_misinfo_bot,
            AgentKind.INFLUENCER: self.post_misinfo_influencer,
        }[kind]


def validate_config(config: SimulationConfig) -> list[str]:
    """Return human-readable descriptions of every violated constraint.

    An empty list means the configuration is usable. This is a total
    function; it never raises.
    """
    violations: list[str] = []

    for name in ("timesteps", "n_users", "initial_news", "recs_per_step",
                 "topic_dim", "feed_cap", "steps_per_day",
                 "infection_recovery_window", "knn_neighbors"):
        value = getattr(config, name)
        if not isinstance(value, int) or value <= 0:
            violations.append(f"{name} must be a positive integer, got {value!r}")

    if not config.avg_followers > 0:
        violations.append(f"avg_followers must be positive, got {config.avg_followers!r}")
    for name in ("popularity_window", "cold_start_min_interactions"):
        value = getattr(config, name)
        if not isinstance(value, int) or value < 0:
            violations.append(f"{name} must be a nonnegative integer, got {value!r}")

    pct_fields = [
        "misinfo_pct", "bot_pct", "influencer_pct",
        "post_prob_regular", "post_prob_bot", "post_prob_influencer",
        "post_misinfo_regular", "post_misinfo_bot", "post_misinfo_influencer",
    ]
    for name in pct_fields:
        value = getattr(config, name)
        if not 0.0 <= value <= 1.0:
            violations.append(f"{name} must lie in [0, 1], got {value!r}")

    if (0.0 <= config.bot_pct <= 1.0 and 0.0 <= config.influencer_pct <= 1.0
            and config.bot_pct + config.influencer_pct >= 1.0):
        violations.append(
            "bot_pct + influencer_pct must be < 1 so that regular users exist, "
            f"got {config.bot_pct} + {config.influencer_pct}"
        )

    if config.engagement_bump < 0:
        violations.append(f"engagement_bump must be nonnegative, got {config.engagement_bump!r}")

    if config.author_topic_noise < 0:
        violations.append(
            f"author_topic_noise must be nonnegative, got {config.author_topic_noise!r}"
        )

    if config.algorithm not in ALGORITHMS:
        violations.append(
            f"algorithm must be one of {', '.join(ALGORITHMS)}, got {config.algorithm!r}"
        )

    if not isinstance(config.rng_seed, int) or not 0 <= config.rng_seed < 2 ** 64:
        violations.append(f"rng_seed must be an integer in [0, 2^64), got {config.rng_seed!r}")

    return violations


_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    """One splitmix64 scrambling round (Steele, Lea & Flood 2014)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix64(*values: int) -> int:
    """Fold integers into one well-mixed 64-bit value.

    Used to derive run seeds and substream keys; stable across platforms
    because it is pure 64-bit integer arithmetic.
    """
    acc = 0x243F6A8885A308D3  # pi fractional bits, arbitrary nonzero start
    for v in values:
        acc = _splitmix64(acc ^ (v & _MASK64))
    return acc


class RandomSource:
    """Seeded pseudorandom source with derivable substreams.

    Backed by numpy's Philox 4x64 bit generator, a named counter-based PRNG
    with published test vectors, so identical seeds yield identical draw
    sequences on every platform. ``substream`` derives an independent child
    stream from a tuple of integers, which keeps draw sequences stable when
    unrelated parts of the simulation change their consumption.
    """

    def __init__(self, seed: int, _key: Optional[tuple[int, int]] = None):
        if _key is None:
            w0 = mix64(seed)
            w1 = mix64(seed, 1)
            _key = (w0, w1)
        self._key = _key
        self.generator = np.random.Generator(
            np.random.Philox(key=np.array(_key, dtype=np.uint64))
        )

    def substream(self, *path: int) -> "RandomSource":
        w0 = mix64(self._key[0], *path)
        w1 = mix64(self._key[1], *path, 1)
        return RandomSource(0, _key=(w0, w1))

    # Thin delegates; the underlying Generator is also exposed for bulk draws.
    def random(self, size=None):
        return self.generator.random(size)

    def uniform(self, low: float, high: float, size=None):
        return self.generator.uniform(low, high, size)

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def integers(self, low: int, high: int, size=None):
        return self.generator.integers(low, high, size=size)

    def choice(self, a, size=None, replace=True, p=None):
        return self.generator.choice(a, size=size, replace=replace, p=p)

    def shuffle(self, a) -> None:
        self.generator.shuffle(a)

    def poisson_knuth(self, lam: float) -> int:
        """Poisson draw via Knuth's product-of-uniforms method.

        Implemented here rather than through ``Generator.poisson`` so the
        draw depends only on the uniform stream, keeping results bit-stable
        across numpy builds. Suitable for the small means used by the graph
        generator.
        """
        threshold = float(np.exp(-lam))
        count = 0
        prod = 1.0
        while True:
            prod *= float(self.generator.random())
            if prod <= threshold:
                return count
            count += 1


def sample_unit_vector(dim: int, rng: RandomSource) -> np.ndarray:
    """Draw a vector uniformly from the unit hypersphere in ``dim`` dimensions.

    Components are i.i.d. standard normal, then normalized; the zero-vector
    corner case (all components underflow) is retried.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    while True:
        v = rng.standard_normal(dim)
        norm = float(np.linalg.norm(v))
        if norm > 0.0:
            return v / norm
