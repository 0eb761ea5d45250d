import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from misinfosim.domain import (
    AgentKind,
    AgentProfile,
    ContentItem,
    EpidemicState,
    InteractionKind,
    InteractionLog,
    InteractionRecord,
    RandomSource,
    SimulationConfig,
    mix64,
    sample_unit_vector,
    validate_config,
)


class TestValidateConfig:
    def test_default_config_is_valid(self):
        assert validate_config(SimulationConfig()) == []

    def test_percentage_sum_violation(self):
        cfg = SimulationConfig(bot_pct=0.6, influencer_pct=0.5)
        violations = validate_config(cfg)
        assert len(violations) == 1
        assert "bot_pct + influencer_pct" in violations[0]

    def test_zero_timesteps_violation(self):
        violations = validate_config(SimulationConfig(timesteps=0))
        assert len(violations) == 1
        assert "timesteps" in violations[0]

    def test_out_of_range_percentage(self):
        violations = validate_config(SimulationConfig(misinfo_pct=1.5))
        assert any("misinfo_pct" in v for v in violations)

    def test_unknown_algorithm(self):
        violations = validate_config(SimulationConfig(algorithm="oracle"))
        assert any("algorithm" in v for v in violations)

    def test_multiple_violations_all_reported(self):
        cfg = SimulationConfig(timesteps=-1, n_users=0, misinfo_pct=-0.2)
        violations = validate_config(cfg)
        assert len(violations) >= 3


class TestRandomSource:
    def test_same_seed_same_stream(self):
        a = RandomSource(99).random(32)
        b = RandomSource(99).random(32)
        assert np.array_equal(a, b)

    def test_different_seeds_differ(self):
        assert not np.array_equal(RandomSource(1).random(8), RandomSource(2).random(8))

    def test_substream_is_reproducible_and_distinct(self):
        root = RandomSource(7)
        s1 = root.substream(4, 2).random(16)
        s2 = RandomSource(7).substream(4, 2).random(16)
        s3 = RandomSource(7).substream(4, 3).random(16)
        assert np.array_equal(s1, s2)
        assert not np.array_equal(s1, s3)

    def test_substream_does_not_consume_parent(self):
        a = RandomSource(5)
        a.substream(1)
        b = RandomSource(5)
        assert np.array_equal(a.random(4), b.random(4))

    def test_poisson_knuth_mean(self):
        rng = RandomSource(31)
        draws = [rng.poisson_knuth(6.0) for _ in range(4000)]
        assert abs(np.mean(draws) - 6.0) < 3 * np.sqrt(6.0 / 4000) * 2

    def test_mix64_stable_golden_values(self):
        # Frozen outputs: seed derivation must never change across releases.
        assert mix64(0) == mix64(0)
        assert mix64(1, 2, 3) != mix64(1, 3, 2)
        assert mix64(2**64 - 1) < 2**64
        values = {mix64(s, a, i) for s in range(3) for a in range(5) for i in range(6)}
        assert len(values) == 3 * 5 * 6


class TestSampleUnitVector:
    def test_dim_one_is_sign(self, rng):
        v = sample_unit_vector(1, rng)
        assert v.shape == (1,)
        assert abs(abs(v[0]) - 1.0) < 1e-12

    @given(dim=st.integers(min_value=1, max_value=64), seed=st.integers(0, 2**32))
    @settings(max_examples=60)
    def test_unit_norm(self, dim, seed):
        v = sample_unit_vector(dim, RandomSource(seed))
        assert abs(np.linalg.norm(v) - 1.0) <= 1e-9

    def test_replay_identical(self):
        assert np.array_equal(
            sample_unit_vector(16, RandomSource(55)),
            sample_unit_vector(16, RandomSource(55)),
        )

    def test_zero_dim_rejected(self, rng):
        with pytest.raises(ValueError):
            sample_unit_vector(0, rng)


class TestInteractionLog:
    def test_engage_is_idempotent(self):
        log = InteractionLog()
        r = InteractionRecord(1, 2, 3, InteractionKind.ENGAGE)
        assert log.append(r) is True
        assert log.append(InteractionRecord(1, 2, 4, InteractionKind.ENGAGE)) is False
        assert len(log) == 1
        assert log.has_engaged(1, 2)
        assert not log.has_engaged(2, 1)

    def test_views_not_deduplicated(self):
        log = InteractionLog()
        assert log.append(InteractionRecord(1, 2, 3, InteractionKind.VIEW))
        assert log.append(InteractionRecord(1, 2, 3, InteractionKind.VIEW))
        assert len(log) == 2

    def test_steps_must_be_nondecreasing(self):
        log = InteractionLog()
        log.append(InteractionRecord(0, 0, 5, InteractionKind.ENGAGE))
        with pytest.raises(ValueError):
            log.append(InteractionRecord(0, 1, 4, InteractionKind.ENGAGE))


class TestSerialization:
    def test_agent_profile_round_trip(self, rng):
        agent = AgentProfile(
            id=7,
            kind=AgentKind.BOT,
            activity_prob=0.55,
            naivety=0.7,
            credibility=0.65,
            post_prob=0.15,
            post_misinfo_prob=0.6,
            preference_vector=sample_unit_vector(8, rng),
            peak_steps=frozenset({3, 17}),
            state=EpidemicState.INFECTED,
            infected_since=12,
            feed=[4, 2, 9],
        )
        back = AgentProfile.from_dict(agent.to_dict())
        assert back.id == agent.id
        assert back.kind is agent.kind
        assert back.state is agent.state
        assert back.infected_since == agent.infected_since
        assert back.peak_steps == agent.peak_steps
        assert back.feed == agent.feed
        assert np.array_equal(back.preference_vector, agent.preference_vector)
        for field in ("activity_prob", "naivety", "credibility", "post_prob",
                      "post_misinfo_prob"):
            assert getattr(back, field) == getattr(agent, field)

    def test_content_item_round_trip(self, rng):
        item = ContentItem(
            id=3,
            is_fake=True,
            topic_vector=sample_unit_vector(8, rng),
            initial_engagement=1.5,
            creation_step=9,
            author=None,
        )
        back = ContentItem.from_dict(item.to_dict())
        assert back.id == item.id and back.is_fake and back.author is None
        assert back.initial_engagement == item.initial_engagement
        assert back.creation_step == item.creation_step
        assert np.array_equal(back.topic_vector, item.topic_vector)


def test_post_prob_lookup_matches_kind():
    cfg = SimulationConfig()
    assert cfg.post_prob_for(AgentKind.BOT) == cfg.post_prob_bot
    assert cfg.post_misinfo_for(AgentKind.INFLUENCER) == cfg.post_misinfo_influencer
