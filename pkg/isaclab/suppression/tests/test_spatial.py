import numpy as np
import pytest

from isaclab.channel.arrays import ArrayGeometry, spatial_steering
from isaclab.covariance.estimate import CovEstimate
from isaclab.errors import NumericalError
from isaclab.scene.grid import OfdmGrid
from isaclab.suppression.maps import beampattern
from isaclab.suppression.spatial import lcmv, spatial_combiner

from .conftest import random_pd

THETA_T = np.deg2rad(-10.0)
CLUTTER = np.deg2rad([25.0, -50.0])


@pytest.fixture
def wide():
    return OfdmGrid(28e9, 120e3, 4, 8), ArrayGeometry.ula(8, 28e9)


def steer(wide, theta, n=1):
    grid, array = wide
    return spatial_steering(array, theta, n, grid)


def clutter_covariance(wide, power=100.0):
    R = np.eye(8, dtype=complex)
    for theta in CLUTTER:
        b = steer(wide, theta)
        R += power * np.outer(b, b.conj())
    return R


def test_mvdr_white_is_mrc(wide):
    grid, array = wide
    u = spatial_combiner('mvdr', THETA_T, 1, array, grid, R_hat=0.3 * np.eye(8))
    b = steer(wide, THETA_T)
    assert np.abs(u - b / np.vdot(b, b).real).max() <= 1e-12


def test_deterministic_nulls(wide):
    grid, array = wide
    u = spatial_combiner('det_null', THETA_T, 1, array, grid, clutter_angles=CLUTTER)
    assert np.vdot(u, steer(wide, THETA_T)) == pytest.approx(1.0, abs=1e-12)
    for theta in CLUTTER:
        assert abs(np.vdot(u, steer(wide, theta))) <= 1e-10


def test_null_on_target_raises(wide):
    grid, array = wide
    with pytest.raises(NumericalError, match='null space'):
        spatial_combiner('det_null', THETA_T, 1, array, grid, clutter_angles=[THETA_T])


def test_subspace_projection_with_mdl_rank(wide):
    grid, array = wide
    R_hat = CovEstimate(clutter_covariance(wide), support=1000)
    u = spatial_combiner('subspace', THETA_T, 1, array, grid, R_hat=R_hat)
    assert np.vdot(u, steer(wide, THETA_T)) == pytest.approx(1.0, abs=1e-10)
    for theta in CLUTTER:
        assert abs(np.vdot(u, steer(wide, theta))) <= 1e-8


def test_lcmv_gains(wide, rng):
    grid, array = wide
    R = random_pd(rng, 8)
    C = np.stack([steer(wide, THETA_T), steer(wide, CLUTTER[0])], axis=1)
    u = spatial_combiner('lcmv', THETA_T, 1, array, grid, R_hat=R, C=C, f=[1.0, 0.0])
    assert np.abs(C.conj().T @ u - np.array([1.0, 0.0])).max() <= 1e-10


def test_lcmv_single_constraint_is_mvdr(wide, rng):
    grid, array = wide
    R = random_pd(rng, 8)
    b = steer(wide, THETA_T)
    mvdr = spatial_combiner('mvdr', THETA_T, 1, array, grid, R_hat=R, loading=0.0)
    assert np.abs(lcmv(R, b, 1.0) - mvdr).max() <= 1e-10
    assert np.vdot(mvdr, b) == pytest.approx(1.0, abs=1e-10)


def test_lcmv_degenerate_constraints(wide):
    b = steer(wide, THETA_T)
    with pytest.raises(NumericalError):
        lcmv(np.eye(8), np.stack([b, b], axis=1), [1.0, 0.0])


def test_mvdr_beampattern_nulls_interferer(wide):
    grid, array = wide
    u = spatial_combiner('mvdr', THETA_T, 1, array, grid, R_hat=clutter_covariance(wide, 1e4))
    pattern = beampattern(u, array, 1, grid, np.concatenate([[THETA_T], CLUTTER]))
    assert pattern[0] == pytest.approx(1.0, abs=1e-10)
    assert np.all(pattern[1:] <= 1e-3)


def test_combiner_argument_errors(wide):
    grid, array = wide
    with pytest.raises(ValueError):
        spatial_combiner('wiener', THETA_T, 1, array, grid)
    with pytest.raises(ValueError):
        spatial_combiner('mvdr', THETA_T, 1, array, grid)
