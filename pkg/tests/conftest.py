import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gateway_tomo import NetworkGraph

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

# Seven-site pigment network: chain 1-2-3-4 feeding the cycle 4-5-6-7.
FMO_EDGES = [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (4, 7)]

# Eight-site tree: chain 1-2-3 with branches 3-4-5 and 3-6-7-8.
TREE8_EDGES = [(1, 2), (2, 3), (3, 4), (4, 5), (3, 6), (6, 7), (7, 8)]


@pytest.fixture
def rng():
    return np.random.default_rng(20250817)


@pytest.fixture
def fmo_graph():
    return NetworkGraph.from_edges(FMO_EDGES)


@pytest.fixture
def tree8_graph():
    return NetworkGraph.from_edges(TREE8_EDGES)
