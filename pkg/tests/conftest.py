import numpy as np
import pytest

from packcert.packing import generate_cubic, generate_fcc, generate_random_saturated

RANDOM_SEEDS = range(1, 21)


@pytest.fixture(scope="session")
def fcc12():
    return generate_fcc(12)


@pytest.fixture(scope="session")
def cubic12():
    return generate_cubic(12)


@pytest.fixture(scope="session")
def fcc8():
    return generate_fcc(8)


@pytest.fixture(scope="session")
def random10():
    """Saturated random packings of radius 10, seeds 1..20."""
    return {k: generate_random_saturated(10, k) for k in RANDOM_SEEDS}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def regular_tetra(edge=2.0):
    s = edge / (2.0 * np.sqrt(2.0))
    return np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float) * s
