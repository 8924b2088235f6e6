import functools

import pytest
from hypothesis import HealthCheck, settings

from besselgap.flow import Flow
from besselgap.surface import build_surface, validate

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

G1 = (1.0, 2.0, 3.0)
G2 = (1.0, 2.0, 3.0, 4.0, 5.0)
G3 = (0.5, 1.3, 2.0, 3.1, 3.5, 4.9, 6.0)


@functools.lru_cache(maxsize=None)
def surface_for(x, alpha=0.0):
    return build_surface(validate(x, alpha))


@functools.lru_cache(maxsize=None)
def flow_for(x, alpha=0.0):
    return Flow(surface_for(x, alpha))


@pytest.fixture(scope="session")
def g1_surface():
    return surface_for(G1)


@pytest.fixture(scope="session")
def g2_surface():
    return surface_for(G2)


@pytest.fixture(scope="session")
def g1_flow():
    return flow_for(G1)


@pytest.fixture(scope="session")
def g2_flow():
    return flow_for(G2)


@functools.lru_cache(maxsize=None)
def time_averages_for(x, T):
    return flow_for(x).time_averages(T)
