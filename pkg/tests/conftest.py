import numpy as np
import pytest

from entropy_lab import PeriodicGrid


@pytest.fixture
def grid256():
    return PeriodicGrid(256)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
