import numpy as np
import pytest

from isaclab.channel.arrays import ArrayGeometry
from isaclab.scene.grid import OfdmGrid


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(2024))


@pytest.fixture
def small_grid():
    return OfdmGrid(28e9, 120e3, 4, 5)


@pytest.fixture
def arrays():
    return ArrayGeometry.ula(3, 28e9), ArrayGeometry.ula(2, 28e9)
