import random

import pytest
from hypothesis import HealthCheck, settings

from skewlattice import gaussian, hamilton

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def zi():
    return gaussian()


@pytest.fixture(scope="session")
def quat():
    return hamilton()


@pytest.fixture
def rng():
    return random.Random(1234)
