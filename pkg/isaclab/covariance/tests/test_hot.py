import numpy as np
import pytest

from isaclab.channel.arrays import ArrayGeometry, spatial_steering
from isaclab.covariance.hot import hot_clutter_cov, hot_covariance_block
from isaclab.scene.grid import OfdmGrid
from isaclab.scene.model import HotPath, NoiseSpec, Scene

from .conftest import crandn


@pytest.fixture
def hot_scene():
    grid = OfdmGrid(28e9, 120e3, 8, 4)
    return Scene(grid, ArrayGeometry.ula(2, grid.f0), ArrayGeometry.ula(3, grid.f0),
                 hot_paths=[HotPath(0.6, 4e-7, 150.0, 2.5)], noise=NoiseSpec('white', 0.0))


def test_single_path_zero_lag(hot_scene):
    spectrum = np.linspace(0.5, 2.0, hot_scene.grid.N)
    R = hot_covariance_block(hot_scene, 3, 3, 0, spectrum)
    b = spatial_steering(hot_scene.rx_array, 0.6, 3, hot_scene.grid)
    assert np.abs(R - 2.5 * spectrum[3] * np.outer(b, b.conj())).max() <= 1e-12


def test_white_symbols_decorrelate_lags(hot_scene):
    assert not np.any(hot_covariance_block(hot_scene, 2, 2, 1))
    assert not np.any(hot_covariance_block(hot_scene, 2, 5, 0))


def test_cross_frequency_phase(hot_scene):
    grid = hot_scene.grid
    spectrum = np.ones((grid.N, grid.N))
    R = hot_covariance_block(hot_scene, 5, 2, 0, spectrum)
    b5 = spatial_steering(hot_scene.rx_array, 0.6, 5, grid)
    b2 = spatial_steering(hot_scene.rx_array, 0.6, 2, grid)
    phase = np.exp(-2j * np.pi * 3 * grid.delta_f * 4e-7)
    assert np.abs(R - 2.5 * phase * np.outer(b5, b2.conj())).max() <= 1e-12


def test_slow_time_correlation_carries_doppler(hot_scene):
    grid = hot_scene.grid
    R = hot_covariance_block(hot_scene, 1, 1, 2, slow_time=np.array([1.0, 0.8, 0.5]))
    b = spatial_steering(hot_scene.rx_array, 0.6, 1, grid)
    phase = np.exp(-2j * np.pi * 150.0 * 2 * grid.T_sym)
    assert np.abs(R - 2.5 * 0.5 * phase * np.outer(b, b.conj())).max() <= 1e-12


def test_model_lattice_domains(hot_scene):
    single = hot_clutter_cov('model', hot_scene, subcarriers=4)
    assert single.domain == 'spatial' and single.dim == 3
    band = hot_clutter_cov('model', hot_scene, subcarriers=[0, 1, 2])
    assert band.domain == 'space_frequency' and band.dim == 9


def test_quiet_window_uses_latest_snapshots(rng):
    Y = crandn(rng, 3, 40)
    est = hot_clutter_cov('quiet_snapshots', snapshots=Y, window=10)
    assert est.support == 10
    assert np.abs(est.R - Y[:, -10:] @ Y[:, -10:].conj().T / 10).max() <= 1e-12


def test_quiet_empty_window():
    with pytest.raises(ValueError):
        hot_clutter_cov('quiet_snapshots', snapshots=np.zeros((3, 0)))


def test_cooperative_zero_kernel(rng):
    X_h = crandn(rng, 4, 8)
    assert not np.any(hot_clutter_cov('cooperative', X_h=X_h, V_hc=np.zeros((8, 8))).R)
    with pytest.raises(ValueError):
        hot_clutter_cov('cooperative', X_h=X_h, V_hc=np.zeros((6, 6)))


def test_unknown_source():
    with pytest.raises(ValueError):
        hot_clutter_cov('oracle')
