from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator

from ..channel.arrays import steering_matrix


@dataclass
class Precoder:
    """Per-subcarrier beamformers W_n = [W_comm | W_radar], shape (N, N_t, N_s)"""

    W: np.ndarray
    K: int = 0

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=complex)
        if self.W.ndim != 3:
            raise ValueError(f'W must have shape (N, N_t, N_s), got {self.W.shape}')
        if not np.all(np.isfinite(self.W)):
            raise ValueError('precoder entries must be finite')
        if not 0 <= self.K <= self.N_s:
            raise ValueError(f'K must lie in [0, N_s], got {self.K}')

    @property
    def N(self):
        return self.W.shape[0]

    @property
    def N_t(self):
        return self.W.shape[1]

    @property
    def N_s(self):
        return self.W.shape[2]

    @property
    def comm(self):
        return self.W[..., :self.K]

    @property
    def radar(self):
        return self.W[..., self.K:]

    def covariance(self):
        """Transmit covariance R_X,n = W_n W_n^H for every subcarrier"""
        return np.einsum('nij,nkj->nik', self.W, self.W.conj())

    def power(self):
        return float(np.sum(np.abs(self.W) ** 2))


def identity_precoder(N, N_t, K=0):
    return Precoder(np.tile(np.eye(N_t, dtype=complex), (N, 1, 1)), K)


def beam_precoder(grid, array, thetas, powers, K=0):
    """Precoder whose columns beam unit-gain power toward the given azimuths

    Column j on subcarrier n is sqrt(p_j / N_t) a_n(theta_j).
    """
    thetas = np.atleast_1d(thetas)
    powers = np.broadcast_to(np.asarray(powers, dtype=float), thetas.shape)
    W = np.stack([steering_matrix(array, thetas, n, grid) for n in range(grid.N)])
    return Precoder(W * np.sqrt(powers / array.count)[None, None, :], K)


def _stack_action(x, v, N_r):
    # block l of X_n v_n is (I_Nr kron x_n[l]^T) v_n[l]
    V = v.reshape(x.shape[0], N_r, x.shape[1])
    return np.einsum('lij,lj->li', V, x).reshape(-1)


def _stack_adjoint(x, y, N_r):
    Y = y.reshape(x.shape[0], N_r)
    return (Y[:, :, None] * x.conj()[:, None, :]).reshape(-1)


@dataclass
class TransmitRecord:
    """Transmitted vectors x_n[l], array of shape (N, L, N_t)"""

    x: np.ndarray
    W: Precoder = None
    S: object = None

    @property
    def N(self):
        return self.x.shape[0]

    @property
    def L(self):
        return self.x.shape[1]

    @property
    def N_t(self):
        return self.x.shape[2]

    def X_n(self, n, N_r):
        """Dense blkdiag{I_Nr kron x_n^T[0], ..., I_Nr kron x_n^T[L-1]}"""
        eye = np.eye(N_r)
        return sla.block_diag(*[np.kron(eye, self.x[n, l][None, :]) for l in range(self.L)])

    def apply_n(self, n, v, N_r):
        """X_n v for a stacked vector (or columns) of length L N_r N_t"""
        v = np.asarray(v)
        if v.ndim == 2:
            return np.stack([_stack_action(self.x[n], c, N_r) for c in v.T], axis=1)
        return _stack_action(self.x[n], v, N_r)

    def adjoint_n(self, n, y, N_r):
        y = np.asarray(y)
        if y.ndim == 2:
            return np.stack([_stack_adjoint(self.x[n], c, N_r) for c in y.T], axis=1)
        return _stack_adjoint(self.x[n], y, N_r)

    def full_band(self, N_r):
        """Full-band X = blkdiag{X_0, ..., X_{N-1}} as a LinearOperator"""
        block_in = self.L * N_r * self.N_t
        block_out = self.L * N_r

        def matvec(v):
            v = np.ravel(v)
            return np.concatenate([self.apply_n(n, v[n * block_in:(n + 1) * block_in], N_r)
                                   for n in range(self.N)])

        def rmatvec(y):
            y = np.ravel(y)
            return np.concatenate([self.adjoint_n(n, y[n * block_out:(n + 1) * block_out], N_r)
                                   for n in range(self.N)])

        return LinearOperator((self.N * block_out, self.N * block_in), matvec=matvec,
                              rmatvec=rmatvec, dtype=complex)


def apply_precoder(W, S):
    """x_n[l] = W_n s_n[l]

    Raises
    ------
    ValueError
        If precoder and symbol grid dimensions disagree.

    """
    if W.N != S.s.shape[0] or W.N_s != S.s.shape[-1]:
        raise ValueError(f'precoder {W.W.shape} does not match symbols {S.s.shape}')
    x = np.einsum('nts,nls->nlt', W.W, S.s)
    return TransmitRecord(x, W, S)
