import numpy as np
import pytest

from isaclab.channel.arrays import ArrayGeometry
from isaclab.scene.grid import OfdmGrid


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(7))


@pytest.fixture
def grid():
    return OfdmGrid(28e9, 120e3, 32, 16)


@pytest.fixture
def rx_array():
    return ArrayGeometry.ula(8, 28e9)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def on_grid_channel(grid, k, m, amplitude=1.0):
    """H[n, l] of a unit scatterer at delay bin k and Doppler bin m"""
    n = np.arange(grid.N)[:, None]
    l = np.arange(grid.L)[None, :]
    return amplitude * np.exp(-2j * np.pi * n * k / grid.N) * np.exp(2j * np.pi * l * m / grid.L)
