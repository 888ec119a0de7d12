"""Spatial pseudo-spectra for angle-of-arrival estimation"""
import logging

import numpy as np
from scipy import signal

from ..constants import Constants
from ..covariance.structured import select_rank
from ..errors import NumericalError
from ..utils.linalg import hermitian, hermitian_solve, is_hermitian, load_diagonal

METHODS = ('bartlett', 'capon', 'music')


def _noise_subspace(R, sources):
    _, evecs = np.linalg.eigh(hermitian(R))
    # eigh sorts ascending, the noise subspace is the first N_r - sources vectors
    return evecs[:, :R.shape[0] - sources]


def aoa_spectrum(method, R_hat, B, sources=None, loading=Constants.LOADING):
    """Bartlett, Capon or MUSIC pseudo-spectrum over an angle grid

    Parameters
    ----------
    method : {'bartlett', 'capon', 'music'}
    R_hat : CovEstimate or numpy.ndarray
        Spatial covariance (N_r x N_r), Hermitian PSD.
    B : numpy.ndarray
        Receive steering vectors b_n(theta) of the angle grid, shape (N_r, G).
    sources : int, optional
        Source count for MUSIC. When omitted it is selected by MDL from the
        eigenvalues, which needs the sample support of a CovEstimate.
    loading : float, optional
        Relative diagonal loading for Capon (0 disables it).

    Returns
    -------
    numpy.ndarray
        Real pseudo-spectrum of length G.

    Raises
    ------
    ValueError
        On an unknown method, a non-Hermitian R or a MUSIC source count >= N_r.
    NumericalError
        If Capon meets a singular unloaded covariance.

    """
    if method not in METHODS:
        raise ValueError('method must be "bartlett", "capon" or "music"')
    R = np.asarray(getattr(R_hat, 'R', R_hat))
    if not is_hermitian(R, 1e-8):
        raise ValueError('covariance must be Hermitian')
    B = np.asarray(B)
    if method == 'bartlett':
        return np.real(np.einsum('ig,ij,jg->g', B.conj(), R, B)) / np.sum(np.abs(B) ** 2, axis=0)
    if method == 'capon':
        Rl = load_diagonal(R, loading) if loading else R
        if not loading and np.linalg.cond(R) > 1.0 / np.finfo(float).eps:
            raise NumericalError('singular covariance in Capon spectrum, use diagonal loading')
        denom = np.real(np.sum(B.conj() * hermitian_solve(Rl, B), axis=0))
        return 1.0 / denom
    if sources is None:
        support = getattr(R_hat, 'support', None)
        if support is None:
            raise ValueError('MUSIC needs a declared source count or a CovEstimate with sample support')
        sources = select_rank(np.linalg.eigvalsh(hermitian(R))[::-1], 'mdl', support)
        logging.debug(f'MDL selected {sources} sources')
    if not 0 <= sources < R.shape[0]:
        raise ValueError(f'MUSIC source count must lie in [0, N_r), got {sources}')
    En = _noise_subspace(R, sources)
    proj = np.sum(np.abs(En.conj().T @ B) ** 2, axis=0)
    return 1.0 / np.maximum(proj, np.finfo(float).tiny)


def spectrum_peaks(spectrum, angles, count):
    """Angles of the `count` highest local maxima of a pseudo-spectrum"""
    idx, _ = signal.find_peaks(np.concatenate([[-np.inf], spectrum, [-np.inf]]))
    idx = idx - 1
    idx = idx[np.argsort(spectrum[idx])[::-1][:count]]
    return np.asarray(angles)[idx]
