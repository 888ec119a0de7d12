"""Small Hermitian-matrix helpers shared by the estimators and filters"""
import logging

import numpy as np
import scipy.linalg as sla

from ..constants import Constants
from ..errors import NumericalError


def hermitian(R):
    R = np.asarray(R)
    return 0.5 * (R + R.conj().T)


def is_hermitian(R, tol=Constants.HERMITIAN_TOL):
    R = np.asarray(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        return False
    scale = max(np.abs(R).max(), 1.0)
    return np.abs(R - R.conj().T).max() <= tol * scale


def project_psd(R, floor=0.0):
    """Clip eigenvalues of a Hermitian matrix at `floor`

    Returns
    -------
    R_psd : numpy.ndarray
    n_clipped : int
        Number of eigenvalues that were raised to the floor.

    """
    w, U = np.linalg.eigh(hermitian(R))
    n_clipped = int(np.sum(w < floor))
    if n_clipped == 0:
        return hermitian(R), 0
    w = np.maximum(w, floor)
    return hermitian((U * w) @ U.conj().T), n_clipped


def load_diagonal(R, eps=Constants.LOADING):
    """R + eps * tr(R)/dim * I, falling back to eps * I for a zero trace"""
    R = np.asarray(R)
    dim = R.shape[0]
    level = np.real(np.trace(R)) / dim
    if level <= 0:
        level = 1.0
    return R + eps * level * np.eye(dim)


def vec(A):
    return np.asarray(A).reshape(-1, order='F')


def unvec(v, shape):
    return np.asarray(v).reshape(shape, order='F')


def exchange(n):
    return np.eye(n)[::-1]


def hermitian_solve(R, B):
    """Solve R X = B for Hermitian positive definite R"""
    try:
        c, low = sla.cho_factor(R, lower=True, check_finite=False)
        return sla.cho_solve((c, low), B, check_finite=False)
    except np.linalg.LinAlgError:
        logging.debug('Cholesky failed, falling back to least squares')
        X, *_ = np.linalg.lstsq(R, B, rcond=None)
        if not np.all(np.isfinite(X)):
            raise NumericalError('singular matrix in hermitian_solve')
        return X


def mvdr(R, s, tol=Constants.NULL_SPACE_TOL):
    """Distortionless minimum-variance weight R^-1 s / (s^H R^-1 s)

    Returns
    -------
    w : numpy.ndarray
    gain : float
        s^H R^-1 s, the output SCNR for a unit-power signal.

    Raises
    ------
    NumericalError
        If s lies (numerically) in the null space of R^-1.

    """
    s = np.asarray(s)
    Ris = hermitian_solve(R, s)
    gain = np.real(np.vdot(s, Ris))
    if gain <= tol * np.real(np.vdot(s, s)) / max(np.abs(np.trace(R)), 1e-300):
        raise NumericalError('target in null space')
    return Ris / gain, gain
