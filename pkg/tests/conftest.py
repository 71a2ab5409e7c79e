import numpy as np
import pytest

from ksns import Grid


@pytest.fixture
def grid16():
    return Grid(n_points=16, box_length=2 * np.pi)


@pytest.fixture
def grid32():
    return Grid(n_points=32, box_length=2 * np.pi)


@pytest.fixture
def grid64():
    return Grid(n_points=64, box_length=16 * np.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(20240915)
