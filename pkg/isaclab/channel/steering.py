import numpy as np
from scipy.sparse.linalg import LinearOperator

from .arrays import spatial_steering


def _doppler_vector(f_d, grid):
    return np.exp(2j * np.pi * f_d * np.arange(grid.L) * grid.T_sym)


def _delay_vector(tau, grid):
    return np.exp(-2j * np.pi * grid.subcarriers * grid.delta_f * tau)


def temporal_steering(kind, param, grid):
    """Doppler steering d(f_D) over symbols or delay steering t(tau) over subcarriers

    Parameters
    ----------
    kind : {'doppler', 'delay'}
    param : float
        Doppler shift [Hz] or round-trip delay [s].
    grid : OfdmGrid

    Returns
    -------
    numpy.ndarray
        d_l = exp(j 2 pi f_D l T_sym) of length L, or
        t_n = exp(-j 2 pi n delta_f tau) of length N.

    """
    if kind == 'doppler':
        return _doppler_vector(param, grid)
    elif kind == 'delay':
        return _delay_vector(param, grid)
    raise ValueError('kind must be "doppler" or "delay"')


def space_time_steering(theta_t, theta_r, f_d, n, tx_array, rx_array, grid):
    """v_n = d(f_D) kron b_n(theta_R) kron conj(a_n(theta_T)), length L N_r N_t

    Entry l N_r N_t + i N_t + j is d_l b_i conj(a_j).
    """
    a = spatial_steering(tx_array, theta_t, n, grid)
    b = spatial_steering(rx_array, theta_r, n, grid)
    return np.kron(_doppler_vector(f_d, grid), np.kron(b, a.conj()))


def full_band_steering(theta_t, theta_r, f_d, tx_array, rx_array, grid):
    """Concatenation of v_n over all subcarriers"""
    return np.concatenate([space_time_steering(theta_t, theta_r, f_d, n, tx_array, rx_array, grid)
                           for n in range(grid.N)])


def slow_time_spatial_steering(theta, f_d, n, rx_array, grid):
    """d(f_D) kron b_n(theta), the receive-side space-time steering of length L N_r"""
    return np.kron(_doppler_vector(f_d, grid), spatial_steering(rx_array, theta, n, grid))


class DelayOperator:
    """T(tau) = diag{t(tau)} kron I acting blockwise on full-band stacked vectors

    Parameters
    ----------
    tau : float
        Delay [s].
    grid : OfdmGrid
    N_r : int
    L : int, optional
        Symbols per block (defaults to grid.L).
    inner : int, optional
        Extra block factor, e.g. N_t when acting on v rather than X v.

    """

    def __init__(self, tau, grid, N_r, L=None, inner=1):
        self.tau = float(tau)
        self.grid = grid
        self.N_r = int(N_r)
        self.L = grid.L if L is None else int(L)
        self.inner = int(inner)
        self.t = _delay_vector(self.tau, grid)

    @property
    def block(self):
        return self.N_r * self.L * self.inner

    @property
    def shape(self):
        size = self.grid.N * self.block
        return (size, size)

    def apply(self, y):
        y = np.asarray(y)
        if y.shape[0] != self.shape[0]:
            raise ValueError(f'expected length {self.shape[0]}, got {y.shape[0]}')
        blocks = y.reshape((self.grid.N, self.block) + y.shape[1:])
        scale = self.t.reshape((-1, 1) + (1,) * (y.ndim - 1))
        return (blocks * scale).reshape(y.shape)

    def __matmul__(self, other):
        if isinstance(other, DelayOperator):
            if other.block != self.block or other.grid != self.grid:
                raise ValueError('delay operators act on different layouts')
            return DelayOperator(self.tau + other.tau, self.grid, self.N_r, self.L, self.inner)
        return self.apply(other)

    def adjoint(self):
        return DelayOperator(-self.tau, self.grid, self.N_r, self.L, self.inner)

    def aslinearoperator(self):
        return LinearOperator(self.shape, matvec=self.apply,
                              rmatvec=lambda y: self.adjoint().apply(y), dtype=complex)


def delay_operator(tau, grid, N_r, L=None):
    return DelayOperator(tau, grid, N_r, L)
