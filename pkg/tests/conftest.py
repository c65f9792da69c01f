import numpy as np
import pytest

from omtopo.meanfield import find_steady_state_fixed_point
from omtopo.scenarios import scenario


@pytest.fixture(scope="session")
def steady_cache():
    """Memoized fixed-point steady states keyed by scenario name."""
    cache = {}

    def get(name, damping=None):
        if name not in cache:
            sc = scenario(name)
            d = damping if damping is not None else sc.settings.damping
            cache[name] = find_steady_state_fixed_point(sc.spec, damping=d)
        return cache[name]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
