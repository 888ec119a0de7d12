import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..constants import Constants
from ..errors import NumericalError
from ..units import velocity_from_doppler

MODES = ('rf', 'mf', 'lmmse', 'hybrid')


def derandomize(Y, X, mode='rf', snr_in=None, guard=Constants.RF_ZERO_GUARD):
    """Remove the data-symbol dependence from gated OFDM echoes

    Parameters
    ----------
    Y : numpy.ndarray
        Gated received grid (N, L).
    X : numpy.ndarray
        Known gated waveform (N, L).
    mode : {'rf', 'mf', 'lmmse', 'hybrid'}
        Reciprocal Y/X, matched Y X*, linear-MMSE Y X* / (|X|^2 + 1/snr_in),
        or reciprocal with matched-filter fallback on near-zero cells.
    snr_in : float, optional
        Input SNR, required for 'lmmse'.
    guard : float, optional
        Cells with |X| < guard * RMS(|X|) count as zero.

    Returns
    -------
    numpy.ndarray
        Estimated channel grid H_hat (N, L).

    Raises
    ------
    NumericalError
        If 'rf' meets a near-zero waveform cell.

    """
    if mode not in MODES:
        raise ValueError('mode must be "rf", "mf", "lmmse" or "hybrid"')
    Y, X = np.asarray(Y), np.asarray(X)
    if Y.shape != X.shape:
        raise ValueError(f'Y {Y.shape} and X {X.shape} differ in shape')
    if mode == 'mf':
        return Y * X.conj()
    if mode == 'lmmse':
        if snr_in is None or not snr_in > 0:
            raise ValueError('lmmse de-randomization needs snr_in > 0')
        return Y * X.conj() / (np.abs(X) ** 2 + 1.0 / snr_in)
    rms = np.sqrt(np.mean(np.abs(X) ** 2))
    small = np.abs(X) < guard * rms if rms > 0 else np.ones(X.shape, dtype=bool)
    if mode == 'rf' and np.any(small):
        n, l = np.argwhere(small)[0]
        raise NumericalError(f'near-zero waveform at cell (n, l) = ({n}, {l}), '
                             f'{int(small.sum())} cells below the zero guard')
    out = np.empty(Y.shape, dtype=complex)
    out[~small] = Y[~small] / X[~small]
    if np.any(small):
        logging.debug(f'Hybrid de-randomization: {int(small.sum())} cells fall back to MF')
        out[small] = Y[small] * X[small].conj()
    return out


def snr_from_scene(scene):
    """Input SNR for LMMSE de-randomization from declared powers"""
    signal = sum(s.power for s in scene.scatterers)
    noise = scene.noise.power(scene.N_r) + sum(g.power for g in scene.hot_paths)
    if noise <= 0:
        return np.inf
    return signal / noise


def delay_grid(grid, oversample=1):
    """On-grid delays k / (oversample N delta_f), k = 0 .. oversample N - 1"""
    K = int(oversample) * grid.N
    return np.arange(K) / (K * grid.delta_f)


def range_focus(y, tau_grid, grid, subband=None):
    """Frequency-to-delay transform of per-subcarrier snapshots

    Parameters
    ----------
    y : numpy.ndarray
        Snapshots with the subcarrier index on axis 0, e.g. (N, N_r, L) or (N, L).
    tau_grid : array_like
        Delays [s].
    grid : OfdmGrid
    subband : array_like, optional
        Subcarrier indices of a subband; the sum is then scaled by 1/sqrt(N_sb).

    Returns
    -------
    numpy.ndarray
        y_tau with the delay index on axis 0.

    Notes
    -----
    y_tau = 1/sqrt(N) sum_n exp(j 2 pi n delta_f tau) y_n

    """
    y = np.asarray(y)
    n = grid.subcarriers if subband is None else np.asarray(subband, dtype=int)
    if n.size == 0:
        raise ValueError('range focusing over an empty subband')
    taus = np.atleast_1d(np.asarray(tau_grid, dtype=float))
    E = np.exp(2j * np.pi * grid.delta_f * np.outer(taus, n)) / np.sqrt(n.size)
    return np.tensordot(E, y[n], axes=(1, 0))


@dataclass
class RangeDopplerMap:
    """chi[k, m] over range bin k and Doppler bin m, natural DFT order"""

    chi: np.ndarray
    grid: object = None

    @property
    def range_axis(self):
        k = np.arange(self.chi.shape[0])
        return Constants.C0 * k / (2.0 * self.chi.shape[0] * self.grid.delta_f)

    @property
    def doppler_axis(self):
        L = self.chi.shape[1]
        m = np.arange(L)
        m = np.where(m >= (L + 1) // 2, m - L, m)
        return m / (L * self.grid.T_sym)

    @property
    def velocity_axis(self):
        return velocity_from_doppler(self.doppler_axis, self.grid.f0)

    def power_db(self, floor=1e-30):
        return 10.0 * np.log10(np.maximum(np.abs(self.chi) ** 2, floor))

    def centered(self):
        """Velocity axis and map with fftshift ordering along Doppler"""
        return np.fft.fftshift(self.velocity_axis), np.fft.fftshift(self.chi, axes=1)

    def to_frame(self):
        """Long-format frame with columns range_m, velocity_mps, power_db"""
        velocity, chi = self.centered()
        power = 10.0 * np.log10(np.maximum(np.abs(chi) ** 2, 1e-30))
        r, v = np.meshgrid(self.range_axis, velocity, indexing='ij')
        return pd.DataFrame({'range_m': r.ravel(), 'velocity_mps': v.ravel(),
                             'power_db': power.ravel()})


def range_doppler_map(H, grid=None):
    """chi = F_N^H H F_L with unitary DFT matrices"""
    H = np.asarray(H)
    N, L = H.shape
    chi = np.fft.fft(np.fft.ifft(H, axis=0), axis=1) * np.sqrt(N) / np.sqrt(L)
    if not np.all(np.isfinite(chi)):
        raise NumericalError('non-finite range-Doppler map')
    return RangeDopplerMap(chi, grid)
