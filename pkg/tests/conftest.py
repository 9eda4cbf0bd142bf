import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)


def random_sequence(rng, frames, rows, cols, scale=1.0):
    shape = (frames, rows, cols)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
