"""Space-time and space-frequency-time adaptive processing"""
import logging
from dataclasses import dataclass, field

import joblib
import numpy as np
import scipy.linalg as sla

from ..channel.arrays import spatial_steering
from ..channel.steering import DelayOperator, full_band_steering, space_time_steering, temporal_steering
from ..constants import Constants
from ..covariance.structured import kronecker_fit, select_rank
from ..errors import NumericalError
from ..utils.linalg import hermitian, hermitian_solve, load_diagonal

VARIANTS = ('classical', 'rd', 'rr', 'structured')


@dataclass
class StapWeights:
    """Adaptive weight for one bin (theta, f_D[, tau]) and its output SCNR on the training covariance"""

    w: np.ndarray
    variant: str
    bin: tuple
    scnr: float
    metadata: dict = field(default_factory=dict)


def output_scnr(w, v_tilde, R):
    """|w^H v|^2 / (w^H R w) for a unit-power target"""
    R = np.asarray(getattr(R, 'R', R))
    den = np.real(np.vdot(w, R @ w))
    if den <= 0:
        raise NumericalError('zero output disturbance power')
    return float(np.abs(np.vdot(w, v_tilde)) ** 2 / den)


def effective_steering(tx, n, theta, f_D, tx_array, rx_array, grid, theta_T=None):
    """v~_n = X_n v_n(theta_T, theta, f_D), length N_r L

    theta_T is the transmit AoD of a bistatic geometry (theta when omitted).
    """
    theta_T = theta if theta_T is None else theta_T
    v = space_time_steering(theta_T, theta, f_D, n, tx_array, rx_array, grid)
    return tx.apply_n(n, v, rx_array.count)


def _rescale(w, v_tilde):
    gain = np.vdot(w, v_tilde)
    if abs(gain) <= Constants.NULL_SPACE_TOL * np.linalg.norm(w) * np.linalg.norm(v_tilde):
        raise NumericalError('target in null space')
    return w / np.conj(gain)


def _separate(v_tilde, dims):
    """Split v = t kron b, t of length L and b of length N_r"""
    L, N_r = dims
    U, s, Vh = np.linalg.svd(np.asarray(v_tilde).reshape(L, N_r))
    if s.size > 1 and s[1] > 1e-8 * s[0]:
        raise ValueError('structured STAP needs a separable steering t kron b')
    return s[0] * U[:, 0], Vh[0]


def dft_beamspace_basis(theta, f_D, n, rx_array, grid, spatial_beams=3, doppler_beams=3,
                        probe=None):
    """DFT beamspace basis around a bin, shape (N_r L, spatial_beams * doppler_beams)

    Spatial beams sit on the N_r-point DFT lattice through the squinted
    spatial frequency of theta, Doppler beams on the L-point lattice through
    f_D T_sym. `probe` (length L, e.g. a_n^H(theta) x_n[l]) modulates the
    Doppler columns so the waveform-aware steering stays inside the span.
    """
    if rx_array.kind != 'ula_half_lambda':
        raise ValueError('the DFT beamspace basis needs a half-wavelength ULA')
    N_r, L = rx_array.count, grid.L
    u0 = 0.5 * np.sin(theta) * grid.chi(n)
    nu0 = f_D * grid.T_sym
    ks = np.arange(spatial_beams) - spatial_beams // 2
    ms = np.arange(doppler_beams) - doppler_beams // 2
    i, l = np.arange(N_r)[:, None], np.arange(L)[:, None]
    F_s = np.exp(-2j * np.pi * i * (u0 + ks / N_r)) / np.sqrt(N_r)
    F_d = np.exp(2j * np.pi * l * (nu0 + ms / L)) / np.sqrt(L)
    if probe is not None:
        F_d = F_d * np.asarray(probe)[:, None]
    return np.kron(F_d, F_s)


def principal_subspace(R, rank=None, criterion='mdl', support=None):
    """Leading eigenpairs (lam[:rank], U[:, :rank]) of a Hermitian covariance

    The rank is selected by `criterion` when not given.

    Raises
    ------
    ValueError
        If the rank lies outside [1, dim].
    NumericalError
        If the rank-th eigenvalue is numerically zero.

    """
    lam, U = np.linalg.eigh(hermitian(R))
    lam, U = lam[::-1], U[:, ::-1]
    if rank is None:
        rank = select_rank(lam, criterion, support)
    dim = lam.size
    if not 1 <= rank <= dim:
        raise ValueError(f'rank must lie in [1, {dim}], got {rank}')
    if lam[rank - 1] <= Constants.RANK_FLOOR * lam[0]:
        raise NumericalError(f'eigenvalue {rank} of the covariance is numerically zero')
    return lam[:rank], U[:, :rank]


def stap_weights(R_hat, v_tilde, variant='classical', T_RD=None, rank=None, criterion='mdl',
                 dims=None, factors=None, loading=Constants.LOADING, bin=None):
    """MVDR-STAP weight w = R^-1 v~ / (v~^H R^-1 v~) and its reduced variants

    Parameters
    ----------
    R_hat : CovEstimate or numpy.ndarray
        Space-time interference-plus-noise covariance (N_r L).
    v_tilde : numpy.ndarray
        Waveform-aware steering X_n v_n.
    variant : {'classical', 'rd', 'rr', 'structured'}
    T_RD : numpy.ndarray, optional
        rd: basis (N_r L x d) of full column rank.
    rank : int, optional
        rr: principal components kept, r <= dim; selected by `criterion`
        when omitted.
    dims : tuple, optional
        structured: (L, N_r).
    factors : tuple, optional
        structured: (R_t, R_s); fitted by the nearest Kronecker product
        when omitted.
    loading : float, optional
        Relative diagonal loading before every inversion.
    bin : tuple, optional
        Bin label stored with the weights.

    Returns
    -------
    StapWeights
        scnr is evaluated on the unloaded R_hat.

    """
    if variant not in VARIANTS:
        raise ValueError('variant must be "classical", "rd", "rr" or "structured"')
    R = np.asarray(getattr(R_hat, 'R', R_hat))
    v_tilde = np.asarray(v_tilde)
    dim = R.shape[0]
    if v_tilde.shape != (dim,):
        raise ValueError(f'steering of length {v_tilde.shape} does not match covariance {R.shape}')
    metadata = {}
    if variant == 'classical':
        w = hermitian_solve(load_diagonal(R, loading), v_tilde)
    elif variant == 'rd':
        if T_RD is None:
            raise ValueError('rd variant needs a basis T_RD')
        T = np.asarray(T_RD)
        if T.shape[0] != dim or np.linalg.matrix_rank(T) < T.shape[1]:
            raise ValueError('T_RD must have dim rows and full column rank')
        R_d = hermitian(T.conj().T @ R @ T)
        w = T @ hermitian_solve(load_diagonal(R_d, loading), T.conj().T @ v_tilde)
        metadata['d'] = T.shape[1]
    elif variant == 'rr':
        lam, Ur = principal_subspace(R, rank, criterion, getattr(R_hat, 'support', None))
        w = Ur @ ((Ur.conj().T @ v_tilde) / lam)
        metadata['rank'] = int(lam.size)
    else:
        if dims is None:
            raise ValueError('structured variant needs dims=(L, N_r)')
        t, b = _separate(v_tilde, dims)
        if factors is None:
            # first Kronecker factor is the slow-time one for this layout
            fit = kronecker_fit(R, dims)
            factors = (fit.metadata['R_sp'], fit.metadata['R_fr'])
        R_t, R_s = (np.asarray(F) for F in factors)
        w_t = hermitian_solve(load_diagonal(R_t, loading), t)
        w_s = hermitian_solve(load_diagonal(R_s, loading), b)
        w = np.kron(w_t / np.vdot(t, w_t).conj(), w_s / np.vdot(b, w_s).conj())
    w = _rescale(w, v_tilde)
    return StapWeights(w, variant, bin, output_scnr(w, v_tilde, R), metadata)


def sftap_weights(R_hat, tx, theta, f_D, tau, tx_array, rx_array, grid, theta_T=None,
                  loading=Constants.LOADING):
    """Full-band MVDR-SFTAP with v~ = T(tau) X v(theta, f_D)

    R_hat must have dimension N_r N L; this is only tractable at desk scale.
    """
    R = np.asarray(getattr(R_hat, 'R', R_hat))
    N_r = rx_array.count
    size = N_r * grid.N * grid.L
    if R.shape != (size, size):
        raise ValueError(f'SFTAP needs a {size} x {size} covariance, got {R.shape}')
    theta_T = theta if theta_T is None else theta_T
    v = full_band_steering(theta_T, theta, f_D, tx_array, rx_array, grid)
    v_tilde = DelayOperator(tau, grid, N_r) @ (tx.full_band(N_r) @ v)
    w = _rescale(hermitian_solve(load_diagonal(R, loading), v_tilde), v_tilde)
    return StapWeights(w, 'sftap', (theta, f_D, tau), output_scnr(w, v_tilde, R))


def transmit_statistics(R_X, L, slow_time=None):
    """Stacked transmit covariance R_x~ = R_st kron R_X, temporally white (I_L) by default"""
    R_st = np.eye(L) if slow_time is None else np.asarray(slow_time)
    return np.kron(R_st, np.asarray(R_X))


def target_covariance(sigma2, R_x_tilde, theta_T, theta_R, f_D, n, tx_array, rx_array, grid):
    """sigma^2 [D(f_D) R_prb D^H(f_D)] kron b b^H with R_prb = (I_L kron a^H) R_x~ (I_L kron a)"""
    L = grid.L
    a = spatial_steering(tx_array, theta_T, n, grid)
    b = spatial_steering(rx_array, theta_R, n, grid)
    A = np.kron(np.eye(L), a.conj()[None, :])
    R_prb = A @ np.asarray(R_x_tilde) @ A.conj().T
    d = temporal_steering('doppler', f_D, grid)
    return sigma2 * np.kron(d[:, None] * R_prb * d.conj()[None, :], np.outer(b, b.conj()))


def cov_driven_stap(R_t, R_I, loading=Constants.LOADING):
    """Dominant generalized eigenvector of (R_t, R_I); scnr = lambda_max(R_I^-1 R_t)"""
    R_t = hermitian(np.asarray(getattr(R_t, 'R', R_t)))
    R_I = np.asarray(getattr(R_I, 'R', R_I))
    try:
        lam, W = sla.eigh(R_t, hermitian(load_diagonal(R_I, loading)))
    except np.linalg.LinAlgError as e:
        raise NumericalError(f'interference covariance is not positive definite: {e}')
    return StapWeights(W[:, -1], 'cov_driven', None, float(lam[-1]))


def save_weights(weights, path, covariance=None):
    """joblib file with the weight sets and the provenance of the covariance they came from"""
    provenance = None
    if covariance is not None:
        provenance = {'estimator': covariance.estimator, 'support': covariance.support,
                      'domain': covariance.domain}
    joblib.dump({'weights': list(weights), 'covariance': provenance}, path)
    logging.debug(f'Saved {len(weights)} weight sets to {path}')


def load_weights(path):
    data = joblib.load(path)
    return data['weights'], data['covariance']
