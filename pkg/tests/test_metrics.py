import numpy as np
import pytest

from misinfosim.content import ContentCatalog
from misinfosim.domain import EpidemicState
from misinfosim.metrics import StepMetricsRow, assign_ranks, mc, mrd, msp, summarize
from tests.test_content import make_agent


def agents_with_states(n_infected, n_exposed, n_total):
    agents = []
    for i in range(n_total):
        a = make_agent(agent_id=i)
        if i < n_infected:
            a.state = EpidemicState.INFECTED
            a.infected_since = 0
        elif i < n_infected + n_exposed:
            a.state = EpidemicState.EXPOSED
        agents.append(a)
    return agents


def catalog_with_fakes(n_items, fake_ids):
    catalog = ContentCatalog(topic_dim=2)
    for i in range(n_items):
        catalog.append(i in fake_ids, np.array([1.0, 0.0]), 0, None)
    return catalog


class TestMsp:
    def test_zero_infected(self):
        assert msp(agents_with_states(0, 0, 200)) == pytest.approx(0.0, abs=1e-12)

    def test_full_saturation(self):
        assert msp(agents_with_states(200, 0, 200)) == pytest.approx(100.0, abs=1e-12)

    def test_ten_percent(self):
        assert msp(agents_with_states(20, 30, 200)) == pytest.approx(10.0, abs=1e-12)

    def test_empty_population_rejected(self):
        with pytest.raises(ValueError):
            msp([])


class TestMrd:
    def test_over_recommending(self):
        catalog = catalog_with_fakes(10, {0})  # catalog 10% fake
        recommended = [0, 1, 2, 3, 0, 5, 6, 7, 8, 9]  # 20% fake
        assert mrd(recommended, catalog) == pytest.approx(0.10, abs=1e-9)

    def test_under_recommending(self):
        catalog = catalog_with_fakes(10, {0})
        recommended = [1, 2, 3, 4, 5, 6, 7, 8, 9, 1]  # 0% fake
        assert mrd(recommended, catalog) == pytest.approx(-0.10, abs=1e-9)

    def test_matching_ratio_is_zero(self):
        catalog = catalog_with_fakes(10, {0})
        recommended = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]
        assert mrd(recommended, catalog) == pytest.approx(0.0, abs=1e-12)

    def test_no_recommendations_records_zero(self):
        assert mrd([], catalog_with_fakes(5, {1})) == 0.0

    def test_empty_catalog_rejected(self):
        with pytest.raises(ValueError):
            mrd([0], ContentCatalog(topic_dim=2))


class TestMc:
    def test_all_real(self):
        catalog = catalog_with_fakes(20, set())
        per_agent = {a: list(range(10)) for a in range(5)}
        assert mc(per_agent, catalog) == 0.0

    def test_one_fake_each(self):
        catalog = catalog_with_fakes(20, {3})
        per_agent = {a: [3] + list(range(4, 13)) for a in range(5)}
        assert mc(per_agent, catalog) == pytest.approx(1.0, abs=1e-12)

    def test_hand_built_mean(self):
        catalog = catalog_with_fakes(10, {0, 1, 2})
        per_agent = {0: [0, 1, 5], 1: [5, 6, 7], 2: [2, 8, 9]}
        assert mc(per_agent, catalog) == pytest.approx(1.0, abs=1e-12)

    def test_agents_with_empty_lists_excluded(self):
        catalog = catalog_with_fakes(10, {0})
        per_agent = {0: [0], 1: []}
        assert mc(per_agent, catalog) == pytest.approx(1.0, abs=1e-12)

    def test_no_recommendations(self):
        assert mc({}, catalog_with_fakes(5, set())) == 0.0


def make_row(step, msp_v=0.0, mrd_v=0.0, mc_v=0.0):
    return StepMetricsRow(step, 200, 0, 0, msp_v, mrd_v, mc_v, 400, 40, 0)


class TestSummarize:
    def test_constant_series(self):
        rows = [make_row(i, msp_v=10.0) for i in range(1, 11)]
        s = summarize(rows, "random", 1)
        assert s.mean_msp == pytest.approx(10.0)

    def test_alternating_series(self):
        rows = [make_row(i, msp_v=0.0 if i % 2 else 20.0) for i in range(1, 11)]
        assert summarize(rows, "random", 1).mean_msp == pytest.approx(10.0)

    def test_hand_built_means(self):
        data = [(1.0, 0.1, 2.0), (3.0, -0.1, 1.0), (5.0, 0.3, 0.0),
                (7.0, 0.1, 4.0), (9.0, -0.2, 3.0)]
        rows = [make_row(i + 1, *vals) for i, vals in enumerate(data)]
        s = summarize(rows, "popularity", 2)
        assert s.mean_msp == pytest.approx(5.0)
        assert s.mean_mrd == pytest.approx(0.04)
        assert s.mean_mc == pytest.approx(2.0)
        assert s.algorithm == "popularity" and s.iteration == 2

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize([], "random", 1)


class TestAssignRanks:
    def test_distinct_means_rank_permutation(self):
        means = {
            "random": (3.0, 0.0, 1.5),
            "popularity": (9.0, 0.2, 3.0),
            "user_knn": (3.5, 0.01, 1.4),
            "item_knn": (1.0, -0.1, 1.2),
            "content_based": (2.0, -0.05, 1.1),
        }
        ranks = assign_ranks(means, list(means))
        for metric_idx in range(3):
            assert sorted(r[metric_idx] for r in ranks.values()) == [1, 2, 3, 4, 5]
        assert ranks["popularity"] == (5, 5, 5)
        assert ranks["item_knn"][0] == 1

    def test_ties_resolved_by_canonical_order(self):
        means = {"a": (1.0, 0.0, 0.0), "b": (1.0, 0.0, 0.0)}
        ranks = assign_ranks(means, ["b", "a"])
        assert ranks["b"][0] == 1 and ranks["a"][0] == 2
