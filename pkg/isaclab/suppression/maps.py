"""Post-suppression angle-Doppler maps and receive beampatterns"""
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..channel.arrays import steering_matrix
from ..channel.steering import temporal_steering
from ..constants import Constants
from ..units import _lin2db, velocity_from_doppler
from ..utils.linalg import hermitian_solve, load_diagonal
from .stap import principal_subspace

WEIGHTS = ('matched', 'stap', 'rr')


@dataclass
class AngleDopplerMap:
    """Normalized map values[angle, doppler] at one range gate"""

    values: np.ndarray
    thetas: np.ndarray
    dopplers: np.ndarray
    tau: float
    f0: float
    weights: str = 'matched'

    @property
    def velocity_axis(self):
        return velocity_from_doppler(self.dopplers, self.f0)

    def power_db(self, floor=1e-30):
        return _lin2db(np.maximum(self.values, floor))

    def peak(self):
        """(theta, f_D) of the global maximum"""
        p, m = np.unravel_index(np.argmax(self.values), self.values.shape)
        return self.thetas[p], self.dopplers[m]

    def to_frame(self):
        """Frame with columns angle_deg, velocity_mps, power_db"""
        theta, vel = np.meshgrid(np.rad2deg(self.thetas), self.velocity_axis, indexing='ij')
        return pd.DataFrame({'angle_deg': theta.ravel(), 'velocity_mps': vel.ravel(),
                             'power_db': self.power_db().ravel()})


def default_map_axes(grid, step_deg=Constants.ANGLE_STEP_DEG):
    """Azimuths over [-90, 90] deg and Dopplers spaced 1 / (2 L T_sym) over the unambiguous interval"""
    thetas = np.deg2rad(np.arange(-90.0, 90.0 + 0.5 * step_deg, step_deg))
    step = 0.5 / (grid.L * grid.T_sym)
    dopplers = np.arange(-grid.L, grid.L) * step
    return thetas, dopplers


def _bin_steering(x_n, A, B, D):
    """v~[l, i, p, m] = d_l(f_m) a^H(theta_p) x_n[l] b_i(theta_p), flattened to (L N_r, P, M)"""
    prb = x_n @ A.conj()
    V = D[:, None, None, :] * prb[:, None, :, None] * B[None, :, :, None]
    L, N_r = x_n.shape[0], B.shape[0]
    return V.reshape(L * N_r, A.shape[1], D.shape[1])


def _subcarrier_output(y_n, x_n, A, B, D, R_inv):
    V = _bin_steering(x_n, A, B, D)
    flat = V.reshape(V.shape[0], -1)
    if R_inv is None:
        norms = np.linalg.norm(flat, axis=0)
        z = (flat.conj().T @ y_n) / np.where(norms > 0, norms, 1.0)
    else:
        RiV = R_inv @ flat
        gain = np.real(np.sum(flat.conj() * RiV, axis=0))
        z = (RiV.conj().T @ y_n) / np.sqrt(np.where(gain > 0, gain, np.inf))
    return z.reshape(V.shape[1:])


def _inverse(R, weights, rank, loading):
    if weights == 'stap':
        return hermitian_solve(load_diagonal(R, loading), np.eye(R.shape[0]))
    lam, U = principal_subspace(R, rank)
    return (U / lam) @ U.conj().T


def angle_doppler_map(cube, tx, tau_r, tx_array, rx_array, thetas=None, dopplers=None,
                      weights='matched', covariances=None, rank=None, subcarriers=None,
                      loading=Constants.LOADING, n_jobs=1):
    """map(theta, f_D) = |sum_n e^{j 2 pi n df tau_r} w_n^H(theta, f_D) y_n|^2 / max

    Parameters
    ----------
    cube : DataCube
    tx : TransmitRecord
        Known probing waveform, giving v~_n = X_n v_n.
    tau_r : float
        Range gate used for coherent fusion across subcarriers.
    tx_array, rx_array : ArrayGeometry
    thetas, dopplers : numpy.ndarray, optional
        Map axes [rad], [Hz]; `default_map_axes` when omitted.
    weights : {'matched', 'stap', 'rr'}
        matched: unit-norm w proportional to v~_n. stap: adaptive matched
        filter R^-1 v~_n scaled to unit output disturbance power. rr: the
        same with the rank-`rank` principal-components inverse.
    covariances : sequence, optional
        stap, rr: space-time covariance per processed subcarrier.
    subcarriers : array_like, optional
        Subcarriers to fuse (all by default).
    n_jobs : int, optional
        joblib workers over subcarriers.

    Returns
    -------
    AngleDopplerMap

    """
    if weights not in WEIGHTS:
        raise ValueError('weights must be "matched", "stap" or "rr"')
    grid = cube.grid
    if thetas is None or dopplers is None:
        default_thetas, default_dopplers = default_map_axes(grid)
        thetas = default_thetas if thetas is None else thetas
        dopplers = default_dopplers if dopplers is None else dopplers
    thetas, dopplers = np.atleast_1d(thetas), np.atleast_1d(dopplers)
    ns = np.arange(grid.N) if subcarriers is None else np.atleast_1d(subcarriers)
    if weights != 'matched':
        if covariances is None or len(covariances) != len(ns):
            raise ValueError(f'{weights} weights need one covariance per processed subcarrier')
        if weights == 'rr' and rank is None:
            raise ValueError('rr weights need a rank')
    D = np.stack([temporal_steering('doppler', f, grid) for f in dopplers], axis=1)
    jobs = []
    for k, n in enumerate(ns):
        A = steering_matrix(tx_array, thetas, n, grid)
        B = steering_matrix(rx_array, thetas, n, grid)
        R_inv = None
        if weights != 'matched':
            R_inv = _inverse(np.asarray(getattr(covariances[k], 'R', covariances[k])), weights, rank,
                             loading)
        jobs.append(delayed(_subcarrier_output)(cube.snapshot(n), tx.x[n], A, B, D, R_inv))
    outputs = Parallel(n_jobs=n_jobs)(jobs)
    phase = np.exp(2j * np.pi * ns * grid.delta_f * tau_r)
    fused = np.tensordot(phase, np.stack(outputs), axes=1)
    values = np.abs(fused) ** 2
    top = values.max()
    if top > 0:
        values = values / top
    logging.debug(f'Angle-Doppler map over {len(ns)} subcarriers with {weights} weights')
    return AngleDopplerMap(values, thetas, dopplers, tau_r, grid.f0, weights)


def beampattern(u, rx_array, n, grid, thetas):
    """Receive power pattern |u^H b_n(theta)|^2 over an angle grid"""
    B = steering_matrix(rx_array, np.atleast_1d(thetas), n, grid)
    return np.abs(np.asarray(u).conj() @ B) ** 2
