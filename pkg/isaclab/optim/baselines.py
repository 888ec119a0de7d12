"""Reference designs: radar-only, communication-only and beam-steering heuristic"""
import logging

import cvxpy as cp
import numpy as np

from ..constants import Constants
from ..errors import InfeasibleError
from ..units import _db2lin, _lin2db
from .blp import _design, beams_from_covariance, blp_optimize, mrc_illumination
from .problem import DesignSolution, solve_convex

KINDS = ('radar_only', 'comm_only', 'heuristic')


def _comm_covariances(problem):
    N, K, N_t = problem.H.shape
    R_k = [[cp.Variable((N_t, N_t), hermitian=True) for _ in range(K)] for _ in range(N)]
    constraints = []
    for n in range(N):
        R_n = sum(R_k[n])
        for k in range(K):
            h = problem.H[n, k]
            gamma = problem.gamma[n, k] * (1.0 + Constants.FEAS_MARGIN)
            constraints += [R_k[n][k] >> 0,
                            (1.0 + 1.0 / gamma) * cp.real(h.conj() @ R_k[n][k] @ h)
                            >= cp.real(h.conj() @ R_n @ h) + problem.sigma2_comm]
    power = sum(cp.real(cp.trace(R)) for row in R_k for R in row)
    constraints.append(power <= problem.P_tot * (1.0 - Constants.FEAS_MARGIN))
    solve_convex(cp.Problem(cp.Minimize(power), constraints), 'minimum-power downlink SDP')
    R_users = np.array([[R.value for R in row] for row in R_k]).reshape(N, K, N_t, N_t)
    return 0.5 * (R_users + R_users.conj().swapaxes(-1, -2))


def comm_only(problem):
    """SINR-feasible minimum-power downlink design, MVDR receive applied afterwards

    With no users the design radiates nothing and its SCNR is zero.

    Raises
    ------
    InfeasibleError
        If the SINR thresholds need more than the power budget.

    """
    N, K, N_t = problem.H.shape
    if K == 0:
        return _design(problem, np.zeros((N, N_t, N_t), dtype=complex), 'comm_only')
    R_users = _comm_covariances(problem)
    W = beams_from_covariance(R_users.sum(axis=1), R_users, problem.H)
    # user beams alone still meet every SINR threshold
    W[:, :, K:] = 0.0
    design = _design(problem, W, 'comm_only')
    design.metadata['power'] = float(np.sum(np.abs(W) ** 2))
    return design


def max_min_sinr(problem, low_db=-30.0, high_db=40.0, tol_db=0.01):
    """Largest common SINR threshold the power budget supports, by bisection on
    the minimum-power design (linear value, 0 without users)"""
    if problem.K == 0:
        return 0.0
    if not _supports(problem, low_db):
        return 0.0
    while high_db - low_db > tol_db:
        mid = 0.5 * (low_db + high_db)
        if _supports(problem, mid):
            low_db = mid
        else:
            high_db = mid
    logging.debug(f'max-min SINR {low_db:.2f} dB')
    return float(_db2lin(low_db))


def _supports(problem, gamma_db):
    try:
        _comm_covariances(problem.with_gamma(_db2lin(gamma_db)))
    except InfeasibleError:
        return False
    return True


def heuristic(problem):
    """MRT beams toward the users plus one sensing beam toward the target

    Stream powers come from a linear program that meets every SINR
    threshold and puts the remaining budget on target illumination.
    """
    N, K, N_t = problem.H.shape
    directions = np.zeros((N, N_t, K + 1), dtype=complex)
    for n in range(N):
        for k in range(K):
            directions[n, :, k] = problem.H[n, k] / np.linalg.norm(problem.H[n, k])
        a = problem.a(n)
        directions[n, :, K] = a / np.linalg.norm(a)
    p = cp.Variable((N, K + 1), nonneg=True)
    constraints = [cp.sum(p) <= problem.P_tot * (1.0 - Constants.FEAS_MARGIN)]
    illumination = 0
    for n in range(N):
        G = np.abs(problem.H[n].conj() @ directions[n]) ** 2
        for k in range(K):
            gamma = problem.gamma[n, k] * (1.0 + Constants.FEAS_MARGIN)
            leak = p[n] @ G[k] - G[k, k] * p[n, k]
            constraints.append(G[k, k] * p[n, k] >= gamma * (leak + problem.sigma2_comm))
        gain = np.abs(np.vdot(problem.a(n), directions[n, :, K])) ** 2
        illumination += problem.sigma2_t[n] * gain * p[n, K]
    solve_convex(cp.Problem(cp.Maximize(illumination), constraints), 'heuristic power allocation')
    powers = np.maximum(p.value, 0.0)
    W = np.zeros((N, N_t, K + N_t), dtype=complex)
    W[:, :, :K + 1] = directions * np.sqrt(powers)[:, None, :]
    return _design(problem, W, 'heuristic')


def radar_only(problem, warm_start=None, method='sdr'):
    """K = 0 optimum of the same sensing problem

    Every design in `warm_start` is feasible for the relaxed problem and
    seeds one start of the alternating optimisation.
    """
    relaxed = problem.without_users()
    starts = [_design(relaxed, mrc_illumination(relaxed), 'mrc')]
    if warm_start is not None:
        if isinstance(warm_start, DesignSolution):
            warm_start = [warm_start]
        for design in warm_start:
            starts.append(_design(relaxed, design.W, design.kind))
    solution = blp_optimize(relaxed, init=starts, method=method)
    solution.kind = 'radar_only'
    return solution


def baseline_designs(problem, kind, warm_start=None, method='sdr'):
    """Dispatch to radar_only, comm_only or heuristic"""
    if kind not in KINDS:
        raise ValueError('kind must be "radar_only", "comm_only" or "heuristic"')
    if kind == 'radar_only':
        return radar_only(problem, warm_start, method)
    design = comm_only(problem) if kind == 'comm_only' else heuristic(problem)
    logging.info(f'{kind} baseline: SCNR {_lin2db(max(design.scnr, 1e-300)):.2f} dB')
    return design
