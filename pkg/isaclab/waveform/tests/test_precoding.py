import numpy as np
import pytest

from isaclab.channel.arrays import spatial_steering
from isaclab.channel.steering import space_time_steering, temporal_steering
from isaclab.waveform.precoding import (Precoder, apply_precoder, beam_precoder,
                                        identity_precoder)
from isaclab.waveform.symbols import SymbolGrid, generate_symbol_grid


def _random_precoder(rng, N, N_t, N_s, K=1):
    W = rng.standard_normal((N, N_t, N_s)) + 1j * rng.standard_normal((N, N_t, N_s))
    return Precoder(W, K)


def test_identity_precoder(rng, small_grid):
    S = generate_symbol_grid(small_grid, 1, 3, 'qpsk', rng)
    tx = apply_precoder(identity_precoder(4, 3, 1), S)
    assert np.array_equal(tx.x, S.s)


def test_zero_symbols(small_grid):
    S = SymbolGrid(np.zeros((4, 5, 2), dtype=complex), 1, 'qpsk')
    W = Precoder(np.ones((4, 3, 2)), 1)
    assert not np.any(apply_precoder(W, S).x)


def test_dimension_mismatch(rng, small_grid):
    S = generate_symbol_grid(small_grid, 1, 2, 'qpsk', rng)
    with pytest.raises(ValueError):
        apply_precoder(identity_precoder(4, 3), S)


@pytest.mark.parametrize('seed', range(5))
def test_stacked_product_matches_brute_force(small_grid, arrays, seed):
    rng = np.random.default_rng(seed)
    tx_array, rx_array = arrays
    S = generate_symbol_grid(small_grid, 1, 2, 'qam16', rng)
    tx = apply_precoder(_random_precoder(rng, 4, 3, 2), S)
    theta, f_d = rng.uniform(-1.2, 1.2), rng.uniform(-2e4, 2e4)
    for n in range(small_grid.N):
        v = space_time_steering(theta, theta, f_d, n, tx_array, rx_array, small_grid)
        a = spatial_steering(tx_array, theta, n, small_grid)
        b = spatial_steering(rx_array, theta, n, small_grid)
        d = temporal_steering('doppler', f_d, small_grid)
        expected = np.array([d[l] * b[i] * np.vdot(a, tx.x[n, l])
                             for l in range(small_grid.L) for i in range(2)])
        out = tx.apply_n(n, v, 2)
        assert np.abs(out - expected).max() <= 1e-12 * np.abs(expected).max()
        assert np.allclose(tx.X_n(n, 2) @ v, out, atol=1e-12)


def test_full_band_operator_adjoint(rng, small_grid):
    S = generate_symbol_grid(small_grid, 2, 2, 'qpsk', rng)
    tx = apply_precoder(_random_precoder(rng, 4, 3, 2), S)
    X = tx.full_band(2)
    v = rng.standard_normal(X.shape[1]) + 1j * rng.standard_normal(X.shape[1])
    y = rng.standard_normal(X.shape[0]) + 1j * rng.standard_normal(X.shape[0])
    assert np.vdot(y, X.matvec(v)) == pytest.approx(np.vdot(X.rmatvec(y), v), rel=1e-12)
    block = 5 * 2 * 3
    assert np.allclose(X.matvec(v)[10:20], tx.apply_n(1, v[block:2 * block], 2))


def test_beam_precoder_gain(small_grid, arrays):
    tx_array, _ = arrays
    W = beam_precoder(small_grid, tx_array, [0.3], [2.0])
    a = spatial_steering(tx_array, 0.3, 2, small_grid)
    assert abs(np.vdot(a, W.W[2, :, 0])) ** 2 == pytest.approx(2.0 * 3, rel=1e-12)
    assert W.power() == pytest.approx(2.0 * 4, rel=1e-12)


def test_transmit_covariance_psd(rng):
    W = _random_precoder(rng, 3, 4, 2)
    R = W.covariance()
    for Rn in R:
        assert np.allclose(Rn, Rn.conj().T)
        assert np.linalg.eigvalsh(Rn).min() > -1e-12
