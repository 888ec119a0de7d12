import numpy as np
import pytest

from isaclab.channel.arrays import ArrayGeometry, spatial_steering, steering_matrix
from isaclab.channel.steering import (DelayOperator, delay_operator, space_time_steering,
                                      temporal_steering)
from isaclab.scene.grid import OfdmGrid


def test_broadside_all_ones(grid):
    assert np.allclose(spatial_steering(ArrayGeometry.ula(5, grid.f0), 0.0, 3, grid), 1.0)


def test_endfire_two_elements(grid):
    b = spatial_steering(ArrayGeometry.ula(2, grid.f0), np.pi / 2, 0, grid)
    assert np.abs(b - np.array([1, -1])).max() <= 1e-12


def test_arbitrary_geometry_brute_force(grid, rng):
    pos = rng.uniform(-0.02, 0.02, (6, 3))
    array = ArrayGeometry(pos)
    for _ in range(20):
        theta, n = rng.uniform(-np.pi, np.pi), int(rng.integers(0, grid.N))
        lam = 299792458.0 / (grid.f0 + n * grid.delta_f)
        k = np.array([np.sin(theta), np.cos(theta), 0.0])
        expected = np.array([np.exp(-2j * np.pi / lam * k @ r) for r in pos])
        assert np.abs(spatial_steering(array, theta, n, grid) - expected).max() <= 1e-12


def test_ula_matches_positions(grid):
    ula = ArrayGeometry.ula(4, grid.f0)
    generic = ArrayGeometry(ula.positions)
    assert np.allclose(steering_matrix(ula, [0.3, -0.7], 5, grid),
                       steering_matrix(generic, [0.3, -0.7], 5, grid), atol=1e-10)


def test_narrowband_independent_of_subcarrier(grid):
    nb = grid.narrowband()
    ula = ArrayGeometry.ula(4, grid.f0)
    assert np.allclose(spatial_steering(ula, 0.4, 0, nb), spatial_steering(ula, 0.4, 7, nb))
    assert not np.allclose(spatial_steering(ula, 0.4, 0, grid), spatial_steering(ula, 0.4, 7, grid))


def test_negated_angle_conjugates(grid):
    ula = ArrayGeometry.ula(4, grid.f0)
    assert np.allclose(spatial_steering(ula, -0.5, 2, grid), spatial_steering(ula, 0.5, 2, grid).conj())


def test_zero_doppler_all_ones(grid):
    assert np.all(temporal_steering('doppler', 0.0, grid) == 1.0)


def test_on_grid_delay_is_dft_column(grid):
    n_d = 3
    tau = n_d / (grid.N * grid.delta_f)
    F = np.fft.fft(np.eye(grid.N)) / np.sqrt(grid.N)
    t = temporal_steering('delay', tau, grid)
    assert np.allclose(t / np.sqrt(grid.N), F[:, n_d], atol=1e-12)
    assert np.linalg.norm(t) ** 2 == pytest.approx(grid.N)


def test_on_grid_doppler_is_dft_column(grid):
    n_v = 2
    d = temporal_steering('doppler', n_v / (grid.L * grid.T_sym), grid)
    F = np.fft.ifft(np.eye(grid.L)) * np.sqrt(grid.L)
    assert np.allclose(d / np.sqrt(grid.L), F[:, n_v], atol=1e-12)


def test_temporal_steering_bad_kind(grid):
    with pytest.raises(ValueError):
        temporal_steering('range', 1.0, grid)


def test_space_time_single_symbol():
    grid = OfdmGrid(28e9, 120e3, 4, 1)
    tx, rx = ArrayGeometry.ula(3, grid.f0), ArrayGeometry.ula(2, grid.f0)
    v = space_time_steering(0.3, 0.3, 12345.0, 1, tx, rx, grid)
    a, b = spatial_steering(tx, 0.3, 1, grid), spatial_steering(rx, 0.3, 1, grid)
    assert np.allclose(v, np.kron(b, a.conj()), atol=1e-12)


def test_space_time_brute_force(grid, rng):
    tx, rx = ArrayGeometry.ula(3, grid.f0), ArrayGeometry.ula(2, grid.f0)
    theta_t, theta_r, f_d, n = 0.2, -0.6, 4321.0, 5
    v = space_time_steering(theta_t, theta_r, f_d, n, tx, rx, grid)
    a, b = spatial_steering(tx, theta_t, n, grid), spatial_steering(rx, theta_r, n, grid)
    d = temporal_steering('doppler', f_d, grid)
    expected = [d[l] * b[i] * np.conj(a[j]) for l in range(grid.L) for i in range(2) for j in range(3)]
    assert np.abs(v - np.array(expected)).max() <= 1e-12
    assert np.allclose(np.abs(v), 1.0)


def test_delay_operator_identity(grid, rng):
    x = rng.standard_normal(grid.N * 3 * grid.L) + 0j
    assert np.array_equal(delay_operator(0.0, grid, 3).apply(x), x)


def test_delay_operator_composition(grid, rng):
    T1, T2 = DelayOperator(1e-7, grid, 3), DelayOperator(2.5e-7, grid, 3)
    x = rng.standard_normal(T1.shape[0]) + 1j * rng.standard_normal(T1.shape[0])
    assert np.abs(T1 @ (T2 @ x) - (T1 @ T2) @ x).max() <= 1e-12
    assert np.linalg.norm(T1 @ x) == pytest.approx(np.linalg.norm(x), rel=1e-12)
    assert np.allclose(T1.adjoint() @ (T1 @ x), x)
