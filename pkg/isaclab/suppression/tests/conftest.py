import numpy as np
import pytest

from isaclab.channel.arrays import ArrayGeometry
from isaclab.scene.grid import OfdmGrid
from isaclab.waveform.precoding import TransmitRecord


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(101))


@pytest.fixture
def grid():
    return OfdmGrid(28e9, 120e3, 2, 4)


@pytest.fixture
def tx_array():
    return ArrayGeometry.ula(2, 28e9)


@pytest.fixture
def rx_array():
    return ArrayGeometry.ula(3, 28e9)


@pytest.fixture
def tx(rng, grid, tx_array):
    return TransmitRecord(crandn(rng, grid.N, grid.L, tx_array.count))


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_pd(rng, dim, floor=1.0):
    A = crandn(rng, dim, dim)
    return A @ A.conj().T + floor * np.eye(dim)
