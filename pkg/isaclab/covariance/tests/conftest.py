import numpy as np
import pytest

from isaclab.channel.arrays import ArrayGeometry
from isaclab.scene.grid import OfdmGrid
from isaclab.scene.model import NoiseSpec, Scatterer, Scene


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(31))


@pytest.fixture
def small_grid():
    return OfdmGrid(28e9, 120e3, 4, 3)


@pytest.fixture
def patch_scene(small_grid):
    """Two transmit and two receive elements with one cold-clutter patch"""
    clutter = Scatterer('cold_clutter', 0.4, 1e-7, 2000.0, 2.0)
    return Scene(small_grid, ArrayGeometry.ula(2, small_grid.f0), ArrayGeometry.ula(2, small_grid.f0),
                 [clutter], noise=NoiseSpec('white', 0.0))


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
