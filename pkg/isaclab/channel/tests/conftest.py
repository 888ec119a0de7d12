import numpy as np
import pytest

from isaclab.channel.arrays import ArrayGeometry
from isaclab.scene.grid import OfdmGrid
from isaclab.scene.model import NoiseSpec, Scatterer, Scene
from isaclab.waveform.precoding import apply_precoder, beam_precoder
from isaclab.waveform.symbols import generate_symbol_grid


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(99))


@pytest.fixture
def grid():
    return OfdmGrid(28e9, 120e3, 8, 6)


@pytest.fixture
def scene_factory(grid):
    def make(scatterers=(), hot_paths=(), sigma2=0.0, N_t=1, N_r=3, **kwargs):
        return Scene(grid, ArrayGeometry.ula(N_t, grid.f0), ArrayGeometry.ula(N_r, grid.f0),
                     list(scatterers), list(hot_paths), NoiseSpec('white', sigma2), **kwargs)
    return make


@pytest.fixture
def single_stream(grid, rng):
    array = ArrayGeometry.ula(1, grid.f0)
    S = generate_symbol_grid(grid, 0, 1, 'qpsk', rng)
    return apply_precoder(beam_precoder(grid, array, [0.0], [1.0]), S)


def unit_target(theta=0.2, tau=1e-7, f_d=3000.0):
    return Scatterer('target', theta, tau, f_d, 1.0, gain=1.0 + 0j)
