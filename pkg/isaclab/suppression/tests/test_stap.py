import numpy as np
import pytest

from isaclab.channel.arrays import ArrayGeometry
from isaclab.errors import NumericalError
from isaclab.scene.grid import OfdmGrid
from isaclab.suppression.stap import (cov_driven_stap, dft_beamspace_basis, effective_steering,
                                      load_weights, output_scnr, save_weights, sftap_weights,
                                      stap_weights, target_covariance, transmit_statistics)
from isaclab.waveform.precoding import TransmitRecord

from .conftest import crandn, random_pd

THETA = np.deg2rad(15.0)
F_D = 9e3
DIM = 12


@pytest.fixture
def v_tilde(tx, tx_array, rx_array, grid):
    return effective_steering(tx, 1, THETA, F_D, tx_array, rx_array, grid)


def test_effective_steering_is_separable(tx, tx_array, rx_array, grid, v_tilde):
    a = np.exp(-1j * np.pi * np.sin(THETA) * np.arange(2) * grid.chi(1))
    b = np.exp(-1j * np.pi * np.sin(THETA) * np.arange(3) * grid.chi(1))
    d = np.exp(2j * np.pi * F_D * np.arange(grid.L) * grid.T_sym)
    t = d * (tx.x[1] @ a.conj())
    assert np.abs(v_tilde - np.kron(t, b)).max() <= 1e-12


def test_white_disturbance(v_tilde):
    sw = stap_weights(0.5 * np.eye(DIM), v_tilde, loading=0.0)
    energy = np.vdot(v_tilde, v_tilde).real
    assert np.abs(sw.w - v_tilde / energy).max() <= 1e-12
    assert sw.scnr == pytest.approx(energy / 0.5, rel=1e-10)


def test_classical_scnr_is_quadratic_form(rng, v_tilde):
    R = random_pd(rng, DIM)
    sw = stap_weights(R, v_tilde, loading=0.0)
    assert sw.scnr == pytest.approx(np.vdot(v_tilde, np.linalg.solve(R, v_tilde)).real, rel=1e-10)
    assert np.vdot(sw.w, v_tilde) == pytest.approx(1.0, abs=1e-10)


def test_classical_beats_random_distortionless_weights(rng, v_tilde):
    for _ in range(5):
        R = random_pd(rng, DIM, floor=0.1)
        best = stap_weights(R, v_tilde, loading=0.0).scnr
        for _ in range(50):
            w = crandn(rng, DIM)
            w = w / np.vdot(w, v_tilde).conj()
            assert output_scnr(w, v_tilde, R) <= best * (1 + 1e-10)


def test_full_rank_rr_is_classical(rng, v_tilde):
    R = random_pd(rng, DIM)
    rr = stap_weights(R, v_tilde, 'rr', rank=DIM)
    classical = stap_weights(R, v_tilde, loading=0.0)
    assert np.abs(rr.w - classical.w).max() <= 1e-10 * np.abs(classical.w).max()
    assert rr.metadata['rank'] == DIM


def test_rr_rank_too_large(rng, v_tilde):
    with pytest.raises(ValueError):
        stap_weights(random_pd(rng, DIM), v_tilde, 'rr', rank=DIM + 1)


def test_rr_zero_eigenvalue(v_tilde):
    R = np.diag(np.r_[np.ones(DIM - 1), 0.0])
    with pytest.raises(NumericalError):
        stap_weights(R, v_tilde, 'rr', rank=DIM)


def test_structured_equals_classical_on_kronecker(rng, v_tilde, grid):
    R = np.kron(random_pd(rng, grid.L), random_pd(rng, 3))
    structured = stap_weights(R, v_tilde, 'structured', dims=(grid.L, 3), loading=0.0)
    classical = stap_weights(R, v_tilde, loading=0.0)
    assert np.linalg.norm(structured.w - classical.w) <= 1e-8 * np.linalg.norm(classical.w)
    assert structured.scnr == pytest.approx(classical.scnr, rel=1e-8)


def test_structured_with_given_factors(rng, v_tilde, grid):
    R_t, R_s = random_pd(rng, grid.L), random_pd(rng, 3)
    given = stap_weights(np.kron(R_t, R_s), v_tilde, 'structured', dims=(grid.L, 3),
                         factors=(R_t, R_s), loading=0.0)
    assert np.vdot(given.w, v_tilde) == pytest.approx(1.0, abs=1e-10)


def test_structured_needs_separable_steering(rng, grid):
    with pytest.raises(ValueError, match='separable'):
        stap_weights(np.eye(DIM), crandn(rng, DIM), 'structured', dims=(grid.L, 3))


def test_full_beamspace_rd_is_classical(rng, tx, tx_array, rx_array, grid, v_tilde):
    a = np.exp(-1j * np.pi * np.sin(THETA) * np.arange(2) * grid.chi(1))
    T = dft_beamspace_basis(THETA, F_D, 1, rx_array, grid, 3, grid.L, probe=tx.x[1] @ a.conj())
    R = random_pd(rng, DIM)
    rd = stap_weights(R, v_tilde, 'rd', T_RD=T, loading=0.0)
    classical = stap_weights(R, v_tilde, loading=0.0)
    assert np.linalg.norm(rd.w - classical.w) <= 1e-8 * np.linalg.norm(classical.w)


def test_rd_weights_stay_in_basis(rng, tx, rx_array, grid, v_tilde):
    T = dft_beamspace_basis(THETA, F_D, 1, rx_array, grid, 2, 2, probe=np.ones(grid.L))
    sw = stap_weights(random_pd(rng, DIM), v_tilde, 'rd', T_RD=T)
    coef, *_ = np.linalg.lstsq(T, sw.w, rcond=None)
    assert np.linalg.norm(T @ coef - sw.w) <= 1e-10 * np.linalg.norm(sw.w)
    assert np.vdot(sw.w, v_tilde) == pytest.approx(1.0, abs=1e-10)
    assert sw.metadata['d'] == 4


def test_rd_basis_errors(v_tilde, rx_array, grid):
    with pytest.raises(ValueError):
        stap_weights(np.eye(DIM), v_tilde, 'rd')
    T = dft_beamspace_basis(THETA, F_D, 1, rx_array, grid, 1, 2)
    with pytest.raises(ValueError):
        stap_weights(np.eye(DIM), v_tilde, 'rd', T_RD=np.concatenate([T, T], axis=1))
    odd = ArrayGeometry(np.array([[0.0, 0.0, 0.0], [0.004, 0.0, 0.0], [0.011, 0.0, 0.0]]))
    with pytest.raises(ValueError):
        dft_beamspace_basis(THETA, F_D, 1, odd, grid)


def test_unknown_variant_and_length(v_tilde):
    with pytest.raises(ValueError):
        stap_weights(np.eye(DIM), v_tilde, 'jdl')
    with pytest.raises(ValueError):
        stap_weights(np.eye(DIM + 1), v_tilde)


def test_sftap_single_subcarrier_is_classical(rng, tx_array, rx_array):
    grid = OfdmGrid(28e9, 120e3, 1, 4)
    tx = TransmitRecord(crandn(rng, 1, 4, 2))
    R = random_pd(rng, DIM)
    sftap = sftap_weights(R, tx, THETA, F_D, 3e-7, tx_array, rx_array, grid)
    v = effective_steering(tx, 0, THETA, F_D, tx_array, rx_array, grid)
    assert np.abs(sftap.w - stap_weights(R, v).w).max() <= 1e-12


def test_sftap_white_scnr_is_delay_invariant(tx, tx_array, rx_array, grid):
    energy = sum(np.linalg.norm(effective_steering(tx, n, THETA, F_D, tx_array, rx_array, grid)) ** 2
                 for n in range(grid.N))
    for tau in (0.0, 4e-7):
        sw = sftap_weights(np.eye(2 * DIM), tx, THETA, F_D, tau, tx_array, rx_array, grid)
        assert sw.scnr == pytest.approx(energy, rel=1e-10)


def test_sftap_dimension_mismatch(tx, tx_array, rx_array, grid):
    with pytest.raises(ValueError):
        sftap_weights(np.eye(DIM), tx, THETA, F_D, 0.0, tx_array, rx_array, grid)


def test_cov_driven_rank_one_matches_mvdr(rng, v_tilde):
    R_I = random_pd(rng, DIM)
    sw = cov_driven_stap(np.outer(v_tilde, v_tilde.conj()), R_I, loading=0.0)
    mvdr = stap_weights(R_I, v_tilde, loading=0.0)
    cosine = abs(np.vdot(sw.w, mvdr.w)) / (np.linalg.norm(sw.w) * np.linalg.norm(mvdr.w))
    assert cosine == pytest.approx(1.0, abs=1e-8)
    assert sw.scnr == pytest.approx(mvdr.scnr, rel=1e-8)


def test_cov_driven_equal_covariances(rng):
    R = random_pd(rng, 6)
    assert cov_driven_stap(R, R, loading=0.0).scnr == pytest.approx(1.0, abs=1e-10)


def test_cov_driven_singular_interference(rng):
    with pytest.raises(NumericalError):
        cov_driven_stap(np.eye(3), -np.eye(3), loading=0.0)


def test_known_waveform_target_covariance_is_rank_one(tx, tx_array, rx_array, grid, v_tilde):
    x = tx.x[1].reshape(-1)
    R_t = target_covariance(1.0, np.outer(x, x.conj()), THETA, THETA, F_D, 1, tx_array, rx_array,
                            grid)
    assert np.abs(R_t - np.outer(v_tilde, v_tilde.conj())).max() <= 1e-10


def test_white_transmit_statistics_lose_doppler(rng, tx_array, rx_array, grid):
    R_x = transmit_statistics(random_pd(rng, 2), grid.L)
    R_I = random_pd(rng, DIM)
    scnr = [cov_driven_stap(target_covariance(2.0, R_x, THETA, THETA, f, 1, tx_array, rx_array,
                                              grid), R_I).scnr for f in (0.0, 2e4)]
    assert scnr[0] == pytest.approx(scnr[1], rel=1e-10)


def test_correlated_transmit_statistics_keep_doppler(rng, tx_array, rx_array, grid):
    R_x = transmit_statistics(random_pd(rng, 2), grid.L, slow_time=np.ones((grid.L, grid.L)))
    R_I = random_pd(rng, DIM)
    scnr = [cov_driven_stap(target_covariance(2.0, R_x, THETA, THETA, f, 1, tx_array, rx_array,
                                              grid), R_I).scnr for f in (0.0, 2e4)]
    assert abs(scnr[0] - scnr[1]) > 1e-6 * scnr[0]


def test_weights_file(tmp_path, rng, v_tilde):
    sw = stap_weights(random_pd(rng, DIM), v_tilde, bin=(THETA, F_D))
    path = tmp_path / 'w.joblib'
    save_weights([sw], path)
    back, provenance = load_weights(path)
    assert provenance is None
    assert back[0].bin == (THETA, F_D) and np.array_equal(back[0].w, sw.w)
