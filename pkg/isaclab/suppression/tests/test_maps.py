import numpy as np
import pytest

from isaclab.channel.arrays import ArrayGeometry
from isaclab.channel.synthesis import DataCube
from isaclab.errors import NumericalError
from isaclab.scene.grid import OfdmGrid
from isaclab.suppression.maps import angle_doppler_map, default_map_axes
from isaclab.suppression.stap import effective_steering
from isaclab.waveform.precoding import TransmitRecord

from .conftest import crandn, random_pd

TAU = 2.5e-7


@pytest.fixture
def scene(rng):
    grid = OfdmGrid(28e9, 120e3, 8, 8)
    tx_array, rx_array = ArrayGeometry.ula(4, 28e9), ArrayGeometry.ula(4, 28e9)
    tx = TransmitRecord(crandn(rng, grid.N, grid.L, tx_array.count))
    return grid, tx_array, rx_array, tx


def _echo_cube(grid, tx, tx_array, rx_array, theta, f_D, tau, gain=1.0):
    y = np.zeros((rx_array.count, grid.N, grid.L), dtype=complex)
    for n in range(grid.N):
        v = effective_steering(tx, n, theta, f_D, tx_array, rx_array, grid)
        y[:, n, :] = gain * np.exp(-2j * np.pi * n * grid.delta_f * tau) * v.reshape(grid.L, -1).T
    return DataCube(y, grid)


def test_default_axes(scene):
    grid = scene[0]
    thetas, dopplers = default_map_axes(grid)
    assert thetas.size == 181
    assert dopplers.size == 2 * grid.L
    assert np.diff(dopplers) == pytest.approx(0.5 / (grid.L * grid.T_sym))


def test_matched_map_peaks_at_the_scatterer(scene):
    grid, tx_array, rx_array, tx = scene
    thetas = np.deg2rad(np.arange(-60.0, 61.0, 5.0))
    dopplers = default_map_axes(grid)[1]
    cube = _echo_cube(grid, tx, tx_array, rx_array, thetas[16], dopplers[11], TAU)
    adm = angle_doppler_map(cube, tx, TAU, tx_array, rx_array, thetas, dopplers)
    assert adm.peak() == (thetas[16], dopplers[11])
    assert adm.values.max() == pytest.approx(1.0)
    assert adm.values.shape == (thetas.size, dopplers.size)


def test_map_is_scale_invariant(scene):
    grid, tx_array, rx_array, tx = scene
    thetas, dopplers = np.deg2rad(np.arange(-30.0, 31.0, 10.0)), default_map_axes(grid)[1]
    cube = _echo_cube(grid, tx, tx_array, rx_array, thetas[2], dopplers[3], TAU)
    scaled = DataCube(3.0 * cube.y, grid)
    a = angle_doppler_map(cube, tx, TAU, tx_array, rx_array, thetas, dopplers)
    b = angle_doppler_map(scaled, tx, TAU, tx_array, rx_array, thetas, dopplers)
    assert np.abs(a.values - b.values).max() <= 1e-12


def test_subcarrier_subset_and_parallel_agree(scene):
    grid, tx_array, rx_array, tx = scene
    thetas, dopplers = np.deg2rad(np.arange(-30.0, 31.0, 10.0)), default_map_axes(grid)[1]
    cube = _echo_cube(grid, tx, tx_array, rx_array, thetas[5], dopplers[1], TAU)
    serial = angle_doppler_map(cube, tx, TAU, tx_array, rx_array, thetas, dopplers,
                               subcarriers=[0, 2, 4])
    parallel = angle_doppler_map(cube, tx, TAU, tx_array, rx_array, thetas, dopplers,
                                 subcarriers=[0, 2, 4], n_jobs=2)
    assert np.abs(serial.values - parallel.values).max() <= 1e-12
    assert serial.peak() == (thetas[5], dopplers[1])


def test_noise_only_map_is_flat(rng, scene):
    grid, tx_array, rx_array, tx = scene
    cube = DataCube(crandn(rng, rx_array.count, grid.N, grid.L), grid)
    thetas = np.deg2rad(np.linspace(-60.0, 60.0, 61))
    dopplers = np.linspace(-0.45, 0.45, 61) / grid.T_sym
    adm = angle_doppler_map(cube, tx, TAU, tx_array, rx_array, thetas, dopplers)
    assert adm.power_db().max() - np.median(adm.power_db()) <= 13.0


def test_full_rank_rr_map_equals_stap_map(rng, scene):
    grid, tx_array, rx_array, tx = scene
    dim = grid.L * rx_array.count
    covariances = [random_pd(rng, dim) for _ in range(grid.N)]
    cube = DataCube(crandn(rng, rx_array.count, grid.N, grid.L), grid)
    thetas, dopplers = np.deg2rad(np.arange(-40.0, 41.0, 20.0)), default_map_axes(grid)[1]
    stap = angle_doppler_map(cube, tx, TAU, tx_array, rx_array, thetas, dopplers, 'stap',
                             covariances, loading=0.0)
    rr = angle_doppler_map(cube, tx, TAU, tx_array, rx_array, thetas, dopplers, 'rr',
                           covariances, rank=dim)
    assert np.abs(stap.values - rr.values).max() <= 1e-8


def test_map_argument_errors(scene):
    grid, tx_array, rx_array, tx = scene
    cube = DataCube(np.zeros((rx_array.count, grid.N, grid.L)), grid)
    with pytest.raises(ValueError):
        angle_doppler_map(cube, tx, TAU, tx_array, rx_array, weights='capon')
    with pytest.raises(ValueError):
        angle_doppler_map(cube, tx, TAU, tx_array, rx_array, weights='stap')
    with pytest.raises(ValueError):
        angle_doppler_map(cube, tx, TAU, tx_array, rx_array, weights='stap',
                          covariances=[np.eye(32)])
    with pytest.raises(ValueError):
        angle_doppler_map(cube, tx, TAU, tx_array, rx_array, weights='rr',
                          covariances=[np.eye(32)] * grid.N)


def test_map_frame(scene):
    grid, tx_array, rx_array, tx = scene
    thetas, dopplers = np.deg2rad([-10.0, 0.0, 10.0]), default_map_axes(grid)[1][:4]
    cube = _echo_cube(grid, tx, tx_array, rx_array, 0.0, dopplers[2], TAU)
    frame = angle_doppler_map(cube, tx, TAU, tx_array, rx_array, thetas, dopplers).to_frame()
    assert list(frame.columns) == ['angle_deg', 'velocity_mps', 'power_db']
    assert len(frame) == 12
    assert frame['power_db'].max() == pytest.approx(0.0)
    assert frame['angle_deg'].iloc[0] == pytest.approx(-10.0)


def _low_rank_covariances(rng, grid, dim, rank=3):
    A = crandn(rng, dim, rank)
    return [A @ A.conj().T] * grid.N


@pytest.mark.parametrize('rank', [0, 37])
def test_rr_map_rank_out_of_range(rng, scene, rank):
    grid, tx_array, rx_array, tx = scene
    dim = grid.L * rx_array.count
    cube = DataCube(crandn(rng, rx_array.count, grid.N, grid.L), grid)
    with pytest.raises(ValueError, match='rank'):
        angle_doppler_map(cube, tx, TAU, tx_array, rx_array, weights='rr',
                          covariances=_low_rank_covariances(rng, grid, dim), rank=rank)


def test_rr_map_rank_deficient_covariance(rng, scene):
    grid, tx_array, rx_array, tx = scene
    dim = grid.L * rx_array.count
    cube = DataCube(crandn(rng, rx_array.count, grid.N, grid.L), grid)
    covariances = _low_rank_covariances(rng, grid, dim)
    with pytest.raises(NumericalError):
        angle_doppler_map(cube, tx, TAU, tx_array, rx_array, weights='rr', covariances=covariances,
                          rank=dim)
    adm = angle_doppler_map(cube, tx, TAU, tx_array, rx_array, np.deg2rad([-20.0, 0.0, 20.0]),
                            default_map_axes(grid)[1][:4], 'rr', covariances, rank=3)
    assert np.all(np.isfinite(adm.values))
    assert adm.values.max() == pytest.approx(1.0)
