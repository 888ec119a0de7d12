import numpy as np
import pytest

from isaclab.scene.grid import OfdmGrid


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(1234))


@pytest.fixture
def desk_grid():
    return OfdmGrid(28e9, 120e3, 64, 32)
