import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from misinfosim.content import (
    ContentCatalog,
    DECAY_RATE,
    author_topic_vector,
    engagement,
    evaluate,
    interaction_probability,
    seed_catalog,
)
from misinfosim.domain import (
    AgentKind,
    AgentProfile,
    ContentItem,
    EpidemicState,
    RandomSource,
    SimulationConfig,
)


def make_agent(kind=AgentKind.REGULAR, naivety=0.5, credibility=0.8,
               pref=None, agent_id=0):
    pref = np.array([1.0, 0.0]) if pref is None else np.asarray(pref, dtype=float)
    return AgentProfile(
        id=agent_id, kind=kind, activity_prob=0.5, naivety=naivety,
        credibility=credibility, post_prob=0.05, post_misinfo_prob=0.1,
        preference_vector=pref, peak_steps=frozenset({0}),
        state=EpidemicState.SUSCEPTIBLE,
    )


def make_item(is_fake=False, topic=None, creation_step=0, item_id=0, author=None):
    topic = np.array([1.0, 0.0]) if topic is None else np.asarray(topic, dtype=float)
    return ContentItem(
        id=item_id, is_fake=is_fake, topic_vector=topic,
        initial_engagement=1.5 if is_fake else 1.0,
        creation_step=creation_step, author=author,
    )


class TestSeedCatalog:
    def test_default_pool(self):
        cfg = SimulationConfig()
        catalog = seed_catalog(cfg, RandomSource(4))
        assert catalog.n_items == 400
        assert catalog.n_fake == 40
        assert (catalog.created_view == 0).all()
        assert (catalog.author_view == -1).all()
        norms = np.linalg.norm(catalog.topics_view, axis=1)
        assert np.abs(norms - 1.0).max() <= 1e-9

    def test_degenerate_pool(self):
        cfg = SimulationConfig(initial_news=1, misinfo_pct=0.0)
        catalog = seed_catalog(cfg, RandomSource(4))
        assert catalog.n_items == 1
        assert catalog.n_fake == 0

    def test_deterministic_replay(self):
        cfg = SimulationConfig()
        a = seed_catalog(cfg, RandomSource(99))
        b = seed_catalog(cfg, RandomSource(99))
        assert np.array_equal(a.is_fake_view, b.is_fake_view)
        assert np.array_equal(a.topics_view, b.topics_view)


class TestEngagement:
    def test_fresh_values(self):
        assert engagement(make_item(is_fake=True), 0) == pytest.approx(1.5)
        assert engagement(make_item(is_fake=False), 0) == pytest.approx(1.0)

    def test_fake_age_ten(self):
        value = engagement(make_item(is_fake=True), 10)
        assert value == pytest.approx(1.5 * math.exp(-1.0), abs=1e-9)
        assert value == pytest.approx(0.55181, abs=1e-4)

    def test_decay_ratio_without_events(self):
        item = make_item()
        for age in range(100):
            ratio = engagement(item, age + 1) / engagement(item, age)
            assert ratio == pytest.approx(math.exp(-DECAY_RATE), abs=1e-9)

    def test_before_creation_rejected(self):
        with pytest.raises(ValueError):
            engagement(make_item(creation_step=5), 4)

    def test_engage_bump_closed_form(self):
        item = make_item()
        value = engagement(item, 7, engage_steps=[3, 3, 5], bump=0.1)
        expected = (
            math.exp(-0.1 * 7)
            + 0.1 * math.exp(-0.1 * 4) * 2
            + 0.1 * math.exp(-0.1 * 2)
        )
        assert value == pytest.approx(expected, abs=1e-12)

    @given(st.lists(st.integers(min_value=0, max_value=60), max_size=25),
           st.integers(60, 90))
    @settings(max_examples=60)
    def test_catalog_accumulator_matches_closed_form(self, steps, query):
        catalog = ContentCatalog(topic_dim=2, engagement_bump=0.1)
        item_id = catalog.append(True, np.array([1.0, 0.0]), 0, None)
        for s in sorted(steps):
            catalog.record_engagement(item_id, s)
        expected = engagement(catalog.item(item_id), query, sorted(steps), bump=0.1)
        assert catalog.engagement(item_id, query) == pytest.approx(expected, abs=1e-9)


class TestEvaluate:
    def test_cap_binds_on_fresh_fake(self):
        agent = make_agent(credibility=1.0)
        item = make_item(is_fake=True)
        assert evaluate(agent, item, 0) == pytest.approx(1.5, abs=1e-12)

    def test_orthogonal_topic_scores_zero(self):
        agent = make_agent()
        item = make_item(topic=[0.0, 1.0], is_fake=True)
        assert evaluate(agent, item, 0) == 0.0

    def test_hand_value(self):
        agent = make_agent(credibility=0.8)
        item = make_item(topic=[0.5, math.sqrt(0.75)])
        assert evaluate(agent, item, 0) == pytest.approx(0.4, abs=1e-9)

    def test_negative_cosine_clamped(self):
        agent = make_agent()
        item = make_item(topic=[-1.0, 0.0])
        assert evaluate(agent, item, 0) == 0.0

    @given(st.floats(0.0, 1.0), st.floats(0.01, 1.0), st.integers(0, 80))
    @settings(max_examples=80)
    def test_bounds(self, naivety, credibility, age):
        agent = make_agent(naivety=naivety, credibility=credibility)
        item = make_item(is_fake=True)
        value = evaluate(agent, item, age)
        assert 0.0 <= value <= 1.5


class TestInteractionProbability:
    def test_zero_evaluation_gives_zero(self):
        agent = make_agent()
        item = make_item(topic=[0.0, 1.0], is_fake=True)
        assert interaction_probability(agent, item, 0) == 0.0

    def test_regular_fully_matched_fake(self):
        agent = make_agent(naivety=0.5, credibility=1.0)
        item = make_item(is_fake=True)
        assert interaction_probability(agent, item, 0) == pytest.approx(1.0)

    def test_influencer_selectivity(self):
        agent = make_agent(kind=AgentKind.INFLUENCER, naivety=0.5, credibility=1.0)
        item = make_item(is_fake=True)
        assert interaction_probability(agent, item, 0) == pytest.approx(0.3)

    def test_kind_ordering_on_fake_items(self):
        item = make_item(is_fake=True, topic=[0.8, 0.6])
        ps = {
            kind: interaction_probability(
                make_agent(kind=kind, naivety=0.5, credibility=0.9), item, 0)
            for kind in AgentKind
        }
        assert ps[AgentKind.BOT] >= ps[AgentKind.REGULAR] >= ps[AgentKind.INFLUENCER]

    @given(naivety=st.floats(0.0, 1.0))
    @settings(max_examples=40)
    def test_constant_in_naivety_for_real_items(self, naivety):
        item = make_item(is_fake=False, topic=[0.6, 0.8])
        base = interaction_probability(make_agent(naivety=0.0), item, 0)
        assert interaction_probability(make_agent(naivety=naivety), item, 0) == base

    @given(n1=st.floats(0.0, 1.0), n2=st.floats(0.0, 1.0))
    @settings(max_examples=60)
    def test_monotone_in_naivety_for_fake_items(self, n1, n2):
        if n1 > n2:
            n1, n2 = n2, n1
        item = make_item(is_fake=True, topic=[0.6, 0.8])
        p1 = interaction_probability(make_agent(naivety=n1, credibility=0.7), item, 0)
        p2 = interaction_probability(make_agent(naivety=n2, credibility=0.7), item, 0)
        assert p1 <= p2 + 1e-12

    @given(st.floats(0.0, 1.0), st.floats(0.01, 1.0),
           st.sampled_from(list(AgentKind)), st.booleans(), st.integers(0, 50))
    @settings(max_examples=100)
    def test_result_is_probability(self, naivety, credibility, kind, is_fake, age):
        agent = make_agent(kind=kind, naivety=naivety, credibility=credibility,
                           pref=[0.6, 0.8])
        item = make_item(is_fake=is_fake, topic=[1.0, 0.0])
        p = interaction_probability(agent, item, age)
        assert 0.0 <= p <= 1.0


class TestCatalog:
    def test_item_round_trip(self):
        catalog = ContentCatalog(topic_dim=3)
        topic = np.array([0.0, 1.0, 0.0])
        item_id = catalog.append(True, topic, creation_step=4, author=9)
        item = catalog.item(item_id)
        assert item.id == item_id
        assert item.is_fake and item.initial_engagement == 1.5
        assert item.creation_step == 4 and item.author == 9
        assert np.array_equal(item.topic_vector, topic)
        assert catalog.author_of(item_id) == 9

    def test_fake_fraction_and_growth(self):
        catalog = ContentCatalog(topic_dim=2, capacity=2)
        for i in range(40):
            catalog.append(i % 4 == 0, np.array([1.0, 0.0]), 0, None)
        assert catalog.n_items == 40
        assert catalog.fake_fraction() == pytest.approx(0.25)

    def test_truncated_copy_drops_bumps(self):
        catalog = ContentCatalog(topic_dim=2)
        a = catalog.append(False, np.array([1.0, 0.0]), 0, None)
        catalog.append(True, np.array([0.0, 1.0]), 2, 5)
        catalog.record_engagement(a, 3)
        trunc = catalog.truncated(1)
        assert trunc.n_items == 1
        assert trunc.engagement(a, 3) == pytest.approx(math.exp(-0.3))

    def test_empty_fake_fraction_rejected(self):
        with pytest.raises(ValueError):
            ContentCatalog(topic_dim=2).fake_fraction()


def test_author_topic_vector_is_unit_and_aligned():
    rng = RandomSource(3)
    pref = np.zeros(32)
    pref[0] = 1.0
    topics = np.stack([author_topic_vector(pref, rng, noise=0.5) for _ in range(200)])
    norms = np.linalg.norm(topics, axis=1)
    assert np.abs(norms - 1.0).max() <= 1e-9
    # Posts stay positively aligned with the author's preferences on average.
    assert topics[:, 0].mean() > 0.3
