import pytest

from misinfosim.domain import RandomSource, SimulationConfig


@pytest.fixture
def rng():
    return RandomSource(12345)


@pytest.fixture
def small_config():
    """A fast configuration for engine-level tests."""
    return SimulationConfig(
        timesteps=40,
        n_users=30,
        avg_followers=4.0,
        initial_news=60,
        recs_per_step=5,
        rng_seed=424242,
    )
