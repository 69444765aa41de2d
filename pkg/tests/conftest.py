import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from eqgh.groups import trivial_action
from eqgh.metric import circle_space, validate_space
from eqgh.scenarios import gen_circle

settings.register_profile(
    "eqgh", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("eqgh")


@pytest.fixture
def circle12():
    return circle_space(12)


@pytest.fixture
def z12():
    return gen_circle(12, 12)


@pytest.fixture
def point():
    return trivial_action(validate_space([[0.0]]))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
