"""Joint transmit-receive design problems, solutions and their evaluation"""
import logging
from dataclasses import dataclass, field, replace

import cvxpy as cp
import numpy as np
import pandas as pd

from ..channel.arrays import ArrayGeometry, spatial_steering, steering_matrix
from ..channel.steering import space_time_steering
from ..constants import Constants
from ..errors import InfeasibleError, NumericalError
from ..scene.grid import OfdmGrid
from ..units import _db2lin, _lin2db
from ..utils.linalg import hermitian, unvec, vec
from ..waveform.metrics import comm_metrics, safety_margins
from ..waveform.precoding import TransmitRecord
from ..waveform.symbols import psk_constellation

MODES = ('blp', 'slp')


def _kernel_matrix(V):
    return np.asarray(getattr(V, 'V', V), dtype=complex)


def _per_subcarrier(value, N, name):
    value = np.asarray(value, dtype=float)
    if value.ndim == 0:
        value = np.full(N, float(value))
    if value.shape != (N,):
        raise ValueError(f'{name} must be a scalar or have one entry per subcarrier, got {value.shape}')
    return value


@dataclass
class BlpProblem:
    """Block-level SCNR maximisation under per-user SINR constraints

    Parameters
    ----------
    H : numpy.ndarray
        User channels h_{n,k}, shape (N, K, N_t). K may be zero.
    gamma : float or numpy.ndarray
        Linear SINR thresholds, scalar or (N, K).
    P_tot : float
        Power budget summed over all subcarriers.
    theta_t : float
        Target azimuth [rad].
    sigma2_t : float or numpy.ndarray
        Target power, frequency flat or one value per subcarrier.
    V_sp : sequence
        Spatial clutter kernels (N_r^2, N_t^2), one per subcarrier.
    R_eta : numpy.ndarray
        Waveform-independent disturbance (N, N_r, N_r).
    tx_array, rx_array : ArrayGeometry
    grid : OfdmGrid
    subcarriers : array_like, optional
        Grid subcarrier of each problem subcarrier (0..N-1 by default).
    sigma2_comm : float, optional
        Noise power at the users.

    """

    H: np.ndarray
    gamma: object
    P_tot: float
    theta_t: float
    sigma2_t: object
    V_sp: list
    R_eta: np.ndarray
    tx_array: ArrayGeometry
    rx_array: ArrayGeometry
    grid: OfdmGrid
    subcarriers: object = None
    sigma2_comm: float = 1.0

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=complex)
        if self.H.ndim != 3:
            raise ValueError(f'channels must have shape (N, K, N_t), got {self.H.shape}')
        N, K, N_t = self.H.shape
        if N_t != self.tx_array.count:
            raise ValueError(f'channels have {N_t} antennas, the transmit array {self.tx_array.count}')
        self.gamma = np.broadcast_to(np.asarray(self.gamma, dtype=float), (N, K)).copy()
        if np.any(self.gamma <= 0):
            raise ValueError('SINR thresholds must be positive')
        if not self.P_tot > 0:
            raise ValueError(f'power budget must be positive, got {self.P_tot}')
        if not self.sigma2_comm > 0:
            raise ValueError(f'communication noise power must be positive, got {self.sigma2_comm}')
        self.sigma2_t = _per_subcarrier(self.sigma2_t, N, 'sigma2_t')
        self.V_sp = [_kernel_matrix(V) for V in self.V_sp]
        N_r = self.rx_array.count
        if len(self.V_sp) != N or any(V.shape != (N_r ** 2, N_t ** 2) for V in self.V_sp):
            raise ValueError(f'need {N} spatial kernels of shape {(N_r ** 2, N_t ** 2)}')
        self.R_eta = np.asarray(self.R_eta, dtype=complex)
        if self.R_eta.shape != (N, N_r, N_r):
            raise ValueError(f'R_eta must have shape {(N, N_r, N_r)}, got {self.R_eta.shape}')
        if self.subcarriers is None:
            self.subcarriers = np.arange(N)
        self.subcarriers = np.asarray(self.subcarriers, dtype=int)
        if self.subcarriers.shape != (N,):
            raise ValueError('need one grid subcarrier per problem subcarrier')

    @property
    def N(self):
        return self.H.shape[0]

    @property
    def K(self):
        return self.H.shape[1]

    @property
    def N_t(self):
        return self.H.shape[2]

    @property
    def N_r(self):
        return self.rx_array.count

    def a(self, n):
        return spatial_steering(self.tx_array, self.theta_t, self.subcarriers[n], self.grid)

    def b(self, n):
        return spatial_steering(self.rx_array, self.theta_t, self.subcarriers[n], self.grid)

    def clutter_cov(self, n, R_X):
        """R_cc,n(R_X) = unvec(V_sp vec(R_X))"""
        return hermitian(unvec(self.V_sp[n] @ vec(R_X), (self.N_r, self.N_r)))

    def disturbance(self, n, R_X):
        return self.clutter_cov(n, R_X) + self.R_eta[n]

    def A_t(self, n, u):
        """sigma^2_t,n |u^H b|^2 a a^H"""
        a = self.a(n)
        return self.sigma2_t[n] * np.abs(np.vdot(u, self.b(n))) ** 2 * np.outer(a, a.conj())

    def A_c(self, n, u):
        """unvec(V_sp^H vec(u u^H)), so that tr(A_c R_X) = u^H R_cc(R_X) u"""
        M = unvec(self.V_sp[n].conj().T @ vec(np.outer(u, u.conj())), (self.N_t, self.N_t))
        return hermitian(M)

    def without_users(self):
        """The same sensing problem with K = 0"""
        return replace(self, H=np.zeros((self.N, 0, self.N_t), dtype=complex),
                       gamma=np.zeros((self.N, 0)))

    def with_gamma(self, gamma):
        return replace(self, gamma=gamma)


@dataclass
class SlpProblem:
    """Symbol-level SLP-STAP design for one target bin

    Parameters
    ----------
    H : numpy.ndarray
        User channels (N, K, N_t).
    S : numpy.ndarray
        Intended PSK symbols (N, L, K).
    omega : int
        PSK order.
    gamma_bar : float or numpy.ndarray
        Safety-margin thresholds, scalar or (N, K).
    P_tot : float
        Energy budget over all subcarriers and symbols.
    theta_t, f_D : float
        Target bin [rad], [Hz].
    sigma2_t : float or numpy.ndarray
    V_st : sequence
        Space-time clutter kernels of size L N_r N_t, one per subcarrier.
    R_eta : numpy.ndarray
        (N, N_r L, N_r L).
    tx_array, rx_array, grid, subcarriers
        As for BlpProblem.

    """

    H: np.ndarray
    S: np.ndarray
    omega: int
    gamma_bar: object
    P_tot: float
    theta_t: float
    f_D: float
    sigma2_t: object
    V_st: list
    R_eta: np.ndarray
    tx_array: ArrayGeometry
    rx_array: ArrayGeometry
    grid: OfdmGrid
    subcarriers: object = None

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=complex)
        N, K, N_t = self.H.shape
        L = self.grid.L
        self.S = np.asarray(self.S, dtype=complex).reshape(N, L, K)
        if int(self.omega) < 2:
            raise ValueError(f'PSK order must be >= 2, got {self.omega}')
        self.gamma_bar = np.broadcast_to(np.asarray(self.gamma_bar, dtype=float), (N, K)).copy()
        if np.any(self.gamma_bar <= 0):
            raise ValueError('safety-margin thresholds must be positive')
        if not self.P_tot > 0:
            raise ValueError(f'power budget must be positive, got {self.P_tot}')
        self.sigma2_t = _per_subcarrier(self.sigma2_t, N, 'sigma2_t')
        dim = L * self.rx_array.count * N_t
        self.V_st = [_kernel_matrix(V) for V in self.V_st]
        if len(self.V_st) != N or any(V.shape != (dim, dim) for V in self.V_st):
            raise ValueError(f'need {N} space-time kernels of size {dim}')
        self.R_eta = np.asarray(self.R_eta, dtype=complex)
        size = L * self.rx_array.count
        if self.R_eta.shape != (N, size, size):
            raise ValueError(f'R_eta must have shape {(N, size, size)}, got {self.R_eta.shape}')
        if self.subcarriers is None:
            self.subcarriers = np.arange(N)
        self.subcarriers = np.asarray(self.subcarriers, dtype=int)

    @property
    def N(self):
        return self.H.shape[0]

    @property
    def K(self):
        return self.H.shape[1]

    @property
    def N_t(self):
        return self.H.shape[2]

    @property
    def N_r(self):
        return self.rx_array.count

    @property
    def L(self):
        return self.grid.L

    def a(self, n):
        return spatial_steering(self.tx_array, self.theta_t, self.subcarriers[n], self.grid)

    def v_t(self, n):
        return space_time_steering(self.theta_t, self.theta_t, self.f_D, self.subcarriers[n],
                                   self.tx_array, self.rx_array, self.grid)


@dataclass
class DesignSolution:
    """Outcome of a joint design or a baseline

    blp designs carry R_X (N, N_t, N_t), the beams W (N, N_t, N_s) and the
    spatial combiners u (N, N_r); slp designs carry the waveforms X
    (N, L, N_t) and the STAP filters w (N, N_r L). `sinr` holds per-user
    SINR (blp) or safety margins (slp), recomputed from the design.
    """

    mode: str
    kind: str
    scnr: float
    R_X: np.ndarray = None
    W: np.ndarray = None
    u: np.ndarray = None
    X: np.ndarray = None
    w: np.ndarray = None
    sinr: np.ndarray = None
    trace: list = field(default_factory=list)
    feasible: bool = True
    converged: bool = True
    metadata: dict = field(default_factory=dict)

    @property
    def scnr_db(self):
        return float(_lin2db(self.scnr)) if self.scnr > 0 else -np.inf

    @property
    def eta_trace(self):
        return np.array([t['eta'] for t in self.trace])

    def trace_frame(self):
        """Convergence trace with columns iter, eta, scnr_db, worst_residual"""
        frame = pd.DataFrame(self.trace, columns=['iter', 'eta', 'scnr', 'worst_residual'])
        frame['scnr_db'] = _lin2db(np.maximum(frame['scnr'].to_numpy(dtype=float), 1e-300))
        return frame[['iter', 'eta', 'scnr_db', 'worst_residual']]


def blp_scnr(problem, R_X, u):
    num, den = 0.0, 0.0
    for n in range(problem.N):
        g = np.real(np.vdot(problem.a(n), R_X[n] @ problem.a(n)))
        h = np.abs(np.vdot(u[n], problem.b(n))) ** 2
        num += problem.sigma2_t[n] * h * g
        den += np.real(np.vdot(u[n], problem.disturbance(n, R_X[n]) @ u[n]))
    if den <= 0:
        raise NumericalError('zero disturbance power at the combiner output')
    return float(num / den)


def slp_scnr(problem, X, w):
    tx = TransmitRecord(np.asarray(X))
    num, den = 0.0, 0.0
    for n in range(problem.N):
        Xv = tx.apply_n(n, problem.v_t(n), problem.N_r)
        num += problem.sigma2_t[n] * np.abs(np.vdot(w[n], Xv)) ** 2
        q = tx.adjoint_n(n, w[n], problem.N_r)
        den += np.real(np.vdot(q, problem.V_st[n] @ q) + np.vdot(w[n], problem.R_eta[n] @ w[n]))
    if den <= 0:
        raise NumericalError('zero disturbance power at the STAP output')
    return float(num / den)


def evaluate_scnr(mode, design, problem):
    """SCNR of a design recomputed from the problem statistics

    blp: sum sigma^2 h_n g_n / sum u^H (R_cc(R_X) + R_eta) u.
    slp: sum sigma^2 |w^H X v_t|^2 / sum w^H (X V X^H + R_eta) w.
    """
    if mode not in MODES:
        raise ValueError('mode must be "blp" or "slp"')
    if mode == 'blp':
        return blp_scnr(problem, design.R_X, design.u)
    return slp_scnr(problem, design.X, design.w)


def blp_residuals(problem, W, R_X):
    """Per-user SINR and the worst relative constraint violation of a beam design"""
    sinr = comm_metrics(problem.H, W, problem.sigma2_comm)['sinr'] if problem.K else \
        np.zeros((problem.N, 0))
    worst = 0.0
    if problem.K:
        worst = max(worst, float(np.max((problem.gamma - sinr) / problem.gamma)))
    power = float(np.real(np.trace(R_X, axis1=1, axis2=2)).sum())
    worst = max(worst, (power - problem.P_tot) / problem.P_tot)
    return sinr, max(worst, 0.0)


def slp_residuals(problem, X):
    X = np.asarray(X)
    if problem.K:
        margins = np.stack([safety_margins(problem.H[n], X[n], problem.S[n], problem.omega)
                            for n in range(problem.N)])
        worst = float(np.max((problem.gamma_bar[:, None, :] - margins) / problem.gamma_bar[:, None, :]))
    else:
        margins, worst = np.zeros((problem.N, problem.L, 0)), 0.0
    energy = float(np.sum(np.abs(X) ** 2))
    worst = max(worst, (energy - problem.P_tot) / problem.P_tot)
    return margins, max(worst, 0.0)


def _crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _clutter_patches(rng, count, power):
    thetas = rng.uniform(-np.pi / 2, np.pi / 2, count)
    return thetas, np.full(count, power / max(count, 1))


def random_problem(rng, N=8, N_t=8, N_r=8, K=2, gamma_db=10.0, P_tot=None, clutter_patches=6,
                   clutter_power=10.0, noise_power=1.0, sigma2_t=1.0, theta_t=0.0,
                   sigma2_comm=1.0, grid=None):
    """Random BLP instance with i.i.d. CN(0, I) user channels

    Clutter enters through closed-form spatial kernels of point patches at
    uniform azimuths; R_eta is white.
    """
    grid = OfdmGrid(28e9, 120e3, N, 16) if grid is None else grid
    tx_array, rx_array = ArrayGeometry.ula(N_t, grid.f0), ArrayGeometry.ula(N_r, grid.f0)
    P_tot = float(N) * N_t if P_tot is None else P_tot
    thetas, powers = _clutter_patches(rng, clutter_patches, clutter_power)
    V_sp = []
    for n in range(N):
        A = steering_matrix(tx_array, thetas, n, grid)
        B = steering_matrix(rx_array, thetas, n, grid)
        V = np.zeros((N_r ** 2, N_t ** 2), dtype=complex)
        for c in range(len(thetas)):
            V += powers[c] * np.outer(vec(np.outer(B[:, c], B[:, c].conj())),
                                      vec(np.outer(A[:, c], A[:, c].conj())).conj())
        V_sp.append(V)
    R_eta = np.stack([noise_power * np.eye(N_r, dtype=complex)] * N)
    logging.debug(f'Random BLP instance N={N} N_t={N_t} N_r={N_r} K={K} gamma={gamma_db} dB')
    return BlpProblem(_crandn(rng, N, K, N_t), _db2lin(gamma_db), P_tot, theta_t, sigma2_t, V_sp,
                      R_eta, tx_array, rx_array, grid, sigma2_comm=sigma2_comm)


def random_slp_problem(rng, N=1, L=2, N_t=2, N_r=2, K=1, omega=4, gamma_bar=0.5, P_tot=None,
                       clutter_patches=0, clutter_power=10.0, noise_power=1.0, sigma2_t=1.0,
                       theta_t=0.0, f_D=0.0, grid=None):
    """Random SLP-STAP instance: CN(0, I) channels, uniform PSK symbols, static clutter patches"""
    grid = OfdmGrid(28e9, 120e3, N, L) if grid is None else grid
    tx_array, rx_array = ArrayGeometry.ula(N_t, grid.f0), ArrayGeometry.ula(N_r, grid.f0)
    P_tot = float(N * L * N_t) if P_tot is None else P_tot
    points = psk_constellation(omega)
    S = points[rng.integers(0, omega, size=(N, grid.L, K))]
    thetas, powers = _clutter_patches(rng, clutter_patches, clutter_power)
    dim = grid.L * N_r * N_t
    V_st = []
    for n in range(N):
        V = np.zeros((dim, dim), dtype=complex)
        for c in range(len(thetas)):
            v = space_time_steering(thetas[c], thetas[c], 0.0, n, tx_array, rx_array, grid)
            V += powers[c] * np.outer(v, v.conj())
        V_st.append(V)
    R_eta = np.stack([noise_power * np.eye(grid.L * N_r, dtype=complex)] * N)
    return SlpProblem(_crandn(rng, N, K, N_t), S, omega, gamma_bar, P_tot, theta_t, f_D, sigma2_t,
                      V_st, R_eta, tx_array, rx_array, grid)


def solve_convex(prob, label):
    """Solve a cvxpy problem with the default solver, falling back once

    Raises
    ------
    InfeasibleError
        If the solver certifies infeasibility.
    NumericalError
        If no solver returns a solution.

    """
    try:
        prob.solve(solver=Constants.SOLVER)
    except cp.error.SolverError as e:
        logging.warning(f'{label}: {Constants.SOLVER} failed ({e}), retrying with {Constants.FALLBACK_SOLVER}')
        try:
            prob.solve(solver=Constants.FALLBACK_SOLVER)
        except cp.error.SolverError as e2:
            raise NumericalError(f'{label}: no solver succeeded ({e2})')
    if prob.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        raise InfeasibleError(f'{label} is infeasible')
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise NumericalError(f'{label}: solver ended with status {prob.status}')
    if prob.status == cp.OPTIMAL_INACCURATE:
        logging.warning(f'{label}: solution is inaccurate')
    return prob.value
