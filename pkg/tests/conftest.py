import numpy as np
import pytest
from hypothesis import settings

from duet.spectral import Grid1D, Grid3D

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def line():
    """Soliton-scale 1d grid."""
    return Grid1D(1024, 100.0)


@pytest.fixture(scope="session")
def small_line():
    return Grid1D(128, 2 * np.pi * 8)


@pytest.fixture(scope="session")
def cube():
    return Grid3D(8, 2 * np.pi)


@pytest.fixture(scope="session")
def cube16():
    return Grid3D(16, 2 * np.pi)
