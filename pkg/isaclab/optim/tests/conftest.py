import numpy as np
import pytest

from isaclab.channel.arrays import ArrayGeometry
from isaclab.optim.problem import BlpProblem
from isaclab.scene.grid import OfdmGrid


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(57))


def clear_problem(N=1, N_t=4, N_r=4, K=0, gamma=1.0, P_tot=2.0, noise=0.5, sigma2_t=1.0,
                  theta_t=0.2, H=None, rng=None):
    """BLP instance without cold clutter and with white R_eta"""
    grid = OfdmGrid(28e9, 120e3, N, 4)
    tx_array, rx_array = ArrayGeometry.ula(N_t, grid.f0), ArrayGeometry.ula(N_r, grid.f0)
    if H is None:
        H = crandn(rng, N, K, N_t) if K else np.zeros((N, 0, N_t))
    V_sp = [np.zeros((N_r ** 2, N_t ** 2))] * N
    R_eta = np.stack([noise * np.eye(N_r)] * N)
    return BlpProblem(H, gamma, P_tot, theta_t, sigma2_t, V_sp, R_eta, tx_array, rx_array, grid)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
