from dataclasses import dataclass

import numpy as np

from ..channel.arrays import band_steering, steering_matrix
from ..errors import NumericalError
from ..utils.linalg import hermitian_solve

BEAMFORMERS = ('mrc', 'zf', 'mmse')


@dataclass
class AngleGatedGrid:
    """Gated outputs Y[p, n, l] = r_n(theta_p)^H y_n[l]

    r holds the gating beamformers with shape (P, N, N_r) and cross_gain the
    worst leakage max_{q != p} |r_n^H(theta_p) b_n(theta_q)| per direction.
    """

    Y: np.ndarray
    r: np.ndarray
    thetas: np.ndarray
    beamformer: str
    cross_gain: np.ndarray = None

    def __getitem__(self, p):
        return self.Y[p]


def gating_weights(B, beamformer, noise_level=1.0):
    """Unit-gain gating beamformers for the columns of B (N_r x P)

    mrc : b / ||b||^2
    zf : P b / (b^H P b), P the projector onto the complement of the other directions
    mmse : C^-1 b / (b^H C^-1 b) with C = sum_{q != p} b_q b_q^H + noise_level I
    """
    if beamformer not in BEAMFORMERS:
        raise ValueError('beamformer must be "mrc", "zf" or "mmse"')
    N_r, P = B.shape
    if beamformer == 'mrc':
        return B / np.sum(np.abs(B) ** 2, axis=0)
    if beamformer == 'zf':
        if P > N_r:
            raise ValueError(f'ZF gating needs P <= N_r, got P={P}, N_r={N_r}')
        if np.linalg.matrix_rank(B) < P:
            raise NumericalError('rank-deficient direction matrix for ZF gating')
    R = np.empty_like(B)
    for p in range(P):
        others = np.delete(B, p, axis=1)
        b = B[:, p]
        if beamformer == 'zf':
            if others.shape[1]:
                Q, _ = np.linalg.qr(others)
                w = b - Q @ (Q.conj().T @ b)
            else:
                w = b
        else:
            C = others @ others.conj().T + noise_level * np.eye(N_r)
            w = hermitian_solve(C, b)
        R[:, p] = w / np.vdot(w, b).conj()
    return R


def angle_gate(cube, directions, beamformer, rx_array, noise_level=1.0):
    """Spatially gate a data cube toward a set of directions

    Parameters
    ----------
    cube : DataCube
    directions : array_like
        Gating azimuths theta_p [rad].
    beamformer : {'mrc', 'zf', 'mmse'}
    rx_array : ArrayGeometry
    noise_level : float, optional
        Diagonal term of the MMSE template covariance.

    Returns
    -------
    AngleGatedGrid

    """
    thetas = np.atleast_1d(np.asarray(directions, dtype=float))
    grid = cube.grid
    P = len(thetas)
    r = np.empty((P, grid.N, cube.N_r), dtype=complex)
    cross = np.zeros((P, grid.N))
    for n in range(grid.N):
        B = steering_matrix(rx_array, thetas, n, grid)
        Rn = gating_weights(B, beamformer, noise_level)
        r[:, n, :] = Rn.T
        G = np.abs(Rn.conj().T @ B)
        np.fill_diagonal(G, 0.0)
        cross[:, n] = G.max(axis=1)
    Y = np.einsum('pni,inl->pnl', r.conj(), cube.y)
    return AngleGatedGrid(Y, r, thetas, beamformer, cross)


def gated_waveform(tx, tx_array, theta, grid):
    """Known waveform seen from direction theta, X_p(n, l) = a_n^H(theta) x_n[l]"""
    a = band_steering(tx_array, theta, grid)
    return np.einsum('tn,nlt->nl', a.conj(), tx.x)
