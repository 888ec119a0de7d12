"""Hot-clutter covariance from a scene model, quiet-period data or a cooperative kernel"""
import numpy as np

from ..channel.arrays import spatial_steering
from .estimate import CovEstimate, _outer_mean

SOURCES = ('model', 'quiet_snapshots', 'cooperative')


def _symbol_correlation(spectrum, n, n_prime, delta_l, slow_time):
    """E{s_n[l] s*_n'[l + delta_l]} for temporally white symbols unless slow_time is given"""
    if spectrum is None:
        freq = 1.0 if n == n_prime else 0.0
    else:
        spectrum = np.asarray(spectrum)
        if spectrum.ndim == 1:
            freq = spectrum[n] if n == n_prime else 0.0
        else:
            freq = spectrum[n, n_prime]
    if slow_time is None:
        lag = 1.0 if delta_l == 0 else 0.0
    else:
        slow_time = np.asarray(slow_time)
        lag = slow_time[abs(delta_l)] if abs(delta_l) < slow_time.size else 0.0
        if delta_l < 0:
            lag = np.conj(lag)
    return freq * lag


def hot_covariance_block(scene, n, n_prime, delta_l=0, spectrum=None, slow_time=None):
    """R_hc[n, n'; delta_l] = sum_g sigma_g^2 e^{-j2pi(n-n')df tau_g} e^{-j2pi f_D,g delta_l T}
    b_n b_n'^H E{s_n,g[l] s*_n',g[l + delta_l]}

    Parameters
    ----------
    scene : Scene
        Hot paths supply sigma_g^2, tau_g, f_D,g and theta_g.
    n, n_prime : int
        Subcarriers.
    delta_l : int, optional
        Slow-time lag.
    spectrum : numpy.ndarray, optional
        Emitter power spectrum (N,) or cross-frequency symbol correlation
        (N, N); unit white symbols by default.
    slow_time : numpy.ndarray, optional
        Symbol correlation over lags 0, 1, ...; temporally white by default.

    Returns
    -------
    numpy.ndarray
        N_r x N_r block.

    """
    grid = scene.grid
    R = np.zeros((scene.N_r, scene.N_r), dtype=complex)
    corr = _symbol_correlation(spectrum, n, n_prime, delta_l, slow_time)
    if corr == 0:
        return R
    for g in scene.hot_paths:
        b_n = spatial_steering(scene.rx_array, g.theta, n, grid)
        b_m = spatial_steering(scene.rx_array, g.theta, n_prime, grid)
        phase = np.exp(-2j * np.pi * (n - n_prime) * grid.delta_f * g.tau) \
            * np.exp(-2j * np.pi * g.f_D * delta_l * grid.T_sym)
        R += g.power * phase * corr * np.outer(b_n, b_m.conj())
    return R


def hot_clutter_cov(source, scene=None, subcarriers=None, spectrum=None, snapshots=None,
                    window=None, X_h=None, V_hc=None):
    """Hot-clutter covariance

    Parameters
    ----------
    source : {'model', 'quiet_snapshots', 'cooperative'}
    scene : Scene
        model: the hot paths to evaluate.
    subcarriers : array_like, optional
        model: subcarrier lattice; a single subcarrier yields the spatial
        covariance, several yield the zero-lag space-frequency covariance
        with blocks ordered by subcarrier.
    spectrum : numpy.ndarray, optional
        model: emitter spectrum, see `hot_covariance_block`.
    snapshots : numpy.ndarray
        quiet_snapshots: (N_r, T) snapshots from a muted transmitter.
    window : int, optional
        quiet_snapshots: quasi-stationary window length; the SCM uses the
        most recent `window` snapshots (all of them by default).
    X_h, V_hc : numpy.ndarray
        cooperative: known emitter probing matrix and hot-clutter kernel.

    Returns
    -------
    CovEstimate

    """
    if source not in SOURCES:
        raise ValueError('source must be "model", "quiet_snapshots" or "cooperative"')
    if source == 'model':
        if scene is None:
            raise ValueError('the model source needs a scene')
        ns = [0] if subcarriers is None else [int(n) for n in np.atleast_1d(subcarriers)]
        N_r = scene.N_r
        R = np.zeros((N_r * len(ns), N_r * len(ns)), dtype=complex)
        for i, n in enumerate(ns):
            for j, m in enumerate(ns):
                R[i * N_r:(i + 1) * N_r, j * N_r:(j + 1) * N_r] = \
                    hot_covariance_block(scene, n, m, 0, spectrum)
        domain = 'spatial' if len(ns) == 1 else 'space_frequency'
        return CovEstimate(R, domain, 'hot_model', metadata={'subcarriers': ns})
    if source == 'quiet_snapshots':
        Y = np.asarray(snapshots)
        if Y.ndim != 2 or Y.shape[1] == 0:
            raise ValueError('empty quiet-period snapshot window')
        if window is not None:
            if window < 1:
                raise ValueError(f'window must be >= 1, got {window}')
            Y = Y[:, -int(window):]
        return CovEstimate(_outer_mean(Y), 'spatial', 'hot_quiet', Y.shape[1],
                           {'window': Y.shape[1]})
    X_h = np.asarray(X_h, dtype=complex)
    V_hc = np.asarray(V_hc, dtype=complex)
    if X_h.shape[1] != V_hc.shape[0]:
        raise ValueError(f'emitter waveform {X_h.shape} does not match kernel {V_hc.shape}')
    return CovEstimate(X_h @ V_hc @ X_h.conj().T, 'space_time', 'hot_cooperative')
