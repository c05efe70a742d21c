import numpy as np
import pytest

from virtdyn import PsoParams, collect_singular_set, ur10_chain

SESSION_SEED = 20240


@pytest.fixture(scope="session")
def session_seed():
    return SESSION_SEED


@pytest.fixture(scope="session")
def ur10():
    return ur10_chain()


@pytest.fixture(scope="session")
def singular_set(ur10):
    """1000 PSO-found singular configurations, shared across the suite."""
    return collect_singular_set(ur10, 1000, PsoParams(), seed=SESSION_SEED)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
