"""Spatial clutter suppression: deterministic nulling, subspace projection, MVDR and LCMV"""
import logging

import numpy as np

from ..channel.arrays import spatial_steering, steering_matrix
from ..constants import Constants
from ..covariance.structured import select_rank
from ..errors import NumericalError
from ..utils.linalg import hermitian, hermitian_solve, load_diagonal

METHODS = ('det_null', 'subspace', 'mvdr', 'lcmv')


def _distortionless(P, b):
    """P b / (b^H P b) for an orthogonal projector P"""
    Pb = P @ b
    denom = np.real(np.vdot(b, Pb))
    if denom < Constants.NULL_SPACE_TOL * np.real(np.vdot(b, b)):
        raise NumericalError('target in null space')
    return Pb / denom


def null_projector(B_c):
    """I - B_c B_c^+ for a clutter steering matrix B_c (N_r x C_0)"""
    B_c = np.atleast_2d(B_c)
    return np.eye(B_c.shape[0]) - B_c @ np.linalg.pinv(B_c, rcond=Constants.RANK_FLOOR)


def clutter_subspace(R_hat, rank=None, criterion='mdl'):
    """Dominant eigenvectors U_c of a spatial covariance, rank chosen by `criterion` if not given"""
    R = np.asarray(getattr(R_hat, 'R', R_hat))
    lam, U = np.linalg.eigh(hermitian(R))
    lam, U = lam[::-1], U[:, ::-1]
    if rank is None:
        rank = select_rank(lam, criterion, getattr(R_hat, 'support', None))
        logging.debug(f'{criterion} selected a clutter subspace of dimension {rank}')
    return U[:, :int(rank)]


def lcmv(R, C, f):
    """R^-1 C (C^H R^-1 C)^-1 f"""
    C = np.asarray(C).reshape(R.shape[0], -1)
    f = np.atleast_1d(np.asarray(f, dtype=complex))
    RiC = hermitian_solve(R, C)
    G = C.conj().T @ RiC
    if np.linalg.cond(G) > 1.0 / Constants.NULL_SPACE_TOL:
        raise NumericalError('target in null space: constraint matrix is degenerate')
    return RiC @ np.linalg.solve(G, f)


def spatial_combiner(method, theta_t, n, rx_array, grid, clutter_angles=None, R_hat=None,
                     rank=None, criterion='mdl', C=None, f=None, loading=Constants.LOADING):
    """Distortionless spatial combiner u_n toward theta_t

    Parameters
    ----------
    method : {'det_null', 'subspace', 'mvdr', 'lcmv'}
    theta_t : float
        Target azimuth [rad].
    n : int
        Subcarrier, sets the squinted steering b_n.
    rx_array : ArrayGeometry
    grid : OfdmGrid
    clutter_angles : array_like, optional
        det_null: azimuths to null.
    R_hat : CovEstimate or numpy.ndarray, optional
        subspace, mvdr, lcmv: spatial disturbance covariance.
    rank : int, optional
        subspace: clutter subspace dimension, otherwise picked by `criterion`.
    C, f : numpy.ndarray, optional
        lcmv: constraint steering vectors (N_r x J) and gains (J,). The
        target steering with unit gain is used when C is omitted.
    loading : float, optional
        Relative diagonal loading before inversion.

    Returns
    -------
    numpy.ndarray
        u_n of length N_r with u^H b_n(theta_t) = 1 (LCMV: C^H u = f).

    Raises
    ------
    NumericalError
        When the target lies in the suppressed subspace.

    """
    if method not in METHODS:
        raise ValueError('method must be "det_null", "subspace", "mvdr" or "lcmv"')
    b = spatial_steering(rx_array, theta_t, n, grid)
    if method == 'det_null':
        if clutter_angles is None or len(np.atleast_1d(clutter_angles)) == 0:
            return b / np.real(np.vdot(b, b))
        B_c = steering_matrix(rx_array, np.atleast_1d(clutter_angles), n, grid)
        return _distortionless(null_projector(B_c), b)
    if R_hat is None:
        raise ValueError(f'{method} needs a covariance estimate')
    R = np.asarray(getattr(R_hat, 'R', R_hat))
    if method == 'subspace':
        U_c = clutter_subspace(R_hat, rank, criterion)
        return _distortionless(np.eye(R.shape[0]) - U_c @ U_c.conj().T, b)
    R = load_diagonal(R, loading)
    if method == 'lcmv' and C is not None:
        return lcmv(R, C, np.ones(1) if f is None else f)
    return lcmv(R, b, 1.0)
