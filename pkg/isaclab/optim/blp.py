"""Block-level joint transmit-receive beamforming by alternating optimisation"""
import logging
from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from ..constants import Constants
from ..errors import InfeasibleError, NumericalError
from ..utils.linalg import hermitian, load_diagonal, mvdr
from .problem import DesignSolution, blp_residuals, blp_scnr, solve_convex

METHODS = ('sdr', 'ccp')


@dataclass
class TxUpdate:
    """Transmit step result: covariances, recovered beams and the Dinkelbach objective"""

    R_X: np.ndarray
    R_users: np.ndarray
    W: np.ndarray
    objective: float


def blp_rx_update(problem, R_X, loading=Constants.LOADING):
    """MVDR combiners u_n = R_I^-1 b / (b^H R_I^-1 b) for R_I = R_cc(R_X) + R_eta

    Raises
    ------
    NumericalError
        If the target steering lies in the disturbance null space.

    """
    u = np.zeros((problem.N, problem.N_r), dtype=complex)
    for n in range(problem.N):
        R_I = load_diagonal(problem.disturbance(n, R_X[n]), loading)
        u[n], _ = mvdr(R_I, problem.b(n))
    return u


def _psd_factor(A):
    """G with G^H G = A, negative eigenvalues dropped"""
    lam, U = np.linalg.eigh(hermitian(A))
    return np.sqrt(np.maximum(lam, 0.0))[:, None] * U.conj().T


def _user_beam(R_k, h):
    """w = (h^H R h)^-1/2 R h, the rank-one beam with the same gain toward h"""
    Rh = R_k @ h
    gain = np.real(np.vdot(h, Rh))
    if gain <= 0:
        return np.zeros_like(h)
    return Rh / np.sqrt(gain)


def beams_from_covariance(R_X, R_users, H):
    """Rank-one user beams plus sensing beams from the eigendecomposition of the remainder

    Returns
    -------
    W : numpy.ndarray
        (N, N_t, K + N_t); sensing columns below 1e-9 lambda_max are zero.

    """
    N, K, N_t = H.shape
    W = np.zeros((N, N_t, K + N_t), dtype=complex)
    for n in range(N):
        for k in range(K):
            W[n, :, k] = _user_beam(R_users[n, k], H[n, k])
        rest = hermitian(R_X[n] - W[n, :, :K] @ W[n, :, :K].conj().T)
        lam, U = np.linalg.eigh(rest)
        top = max(lam.max(), 0.0)
        keep = lam > Constants.RANK_FLOOR * max(top, np.real(np.trace(R_X[n])), 1e-300)
        W[n, :, K:][:, keep] = U[:, keep] * np.sqrt(lam[keep])
    return W


def _covariance(W):
    return np.einsum('nts,nus->ntu', W, W.conj())


def _sdr_step(problem, u, eta):
    N, K, N_t = problem.H.shape
    R = [cp.Variable((N_t, N_t), hermitian=True) for _ in range(N)]
    R_k = [[cp.Variable((N_t, N_t), hermitian=True) for _ in range(K)] for _ in range(N)]
    objective, constraints = 0, []
    for n in range(N):
        M = hermitian(problem.A_t(n, u[n]) - eta * problem.A_c(n, u[n]))
        objective += cp.real(cp.trace(M @ R[n]))
        constraints.append(R[n] - sum(R_k[n]) >> 0)
        for k in range(K):
            h = problem.H[n, k]
            gamma = problem.gamma[n, k] * (1.0 + Constants.FEAS_MARGIN)
            constraints += [R_k[n][k] >> 0,
                            (1.0 + 1.0 / gamma) * cp.real(h.conj() @ R_k[n][k] @ h)
                            >= cp.real(h.conj() @ R[n] @ h) + problem.sigma2_comm]
    power = sum(cp.real(cp.trace(R[n])) for n in range(N))
    constraints.append(power <= problem.P_tot * (1.0 - Constants.FEAS_MARGIN))
    solve_convex(cp.Problem(cp.Maximize(objective), constraints), 'BLP transmit SDP')
    R_X = np.stack([hermitian(R[n].value) for n in range(N)])
    R_users = np.zeros((N, K, N_t, N_t), dtype=complex)
    for n in range(N):
        for k in range(K):
            R_users[n, k] = hermitian(R_k[n][k].value)
    return beams_from_covariance(R_X, R_users, problem.H), R_users


def _align_user_beams(W, H):
    """Rotate user beams so that h^H w_k is real and non-negative"""
    W = W.copy()
    for n in range(H.shape[0]):
        for k in range(H.shape[1]):
            z = np.vdot(H[n, k], W[n, :, k])
            if abs(z) > 0:
                W[n, :, k] *= np.conj(z) / abs(z)
    return W


def _dinkelbach_value(problem, W, u, eta):
    value = 0.0
    for n in range(problem.N):
        M = problem.A_t(n, u[n]) - eta * problem.A_c(n, u[n])
        value += np.real(np.sum(W[n].conj() * (M @ W[n])))
    return float(value)


def _ccp_step(problem, u, eta, W0, tol=Constants.CCP_TOL, max_iter=Constants.CCP_MAX_ITER):
    """Convex-concave procedure on the beams: the convex target term is linearised
    around the previous iterate and every subproblem is an SOCP"""
    N, K, N_t = problem.H.shape
    W_prev = _align_user_beams(np.asarray(W0, dtype=complex), problem.H)
    N_s = W_prev.shape[2]
    A_t = [problem.A_t(n, u[n]) for n in range(N)]
    G_c = [_psd_factor(problem.A_c(n, u[n])) for n in range(N)]
    value = _dinkelbach_value(problem, W_prev, u, eta)
    for it in range(max_iter):
        W = [cp.Variable((N_t, N_s), complex=True) for _ in range(N)]
        objective, constraints = 0, []
        for n in range(N):
            C = 2.0 * A_t[n] @ W_prev[n]
            objective += cp.real(cp.sum(cp.multiply(C.conj(), W[n]))) \
                - eta * cp.sum_squares(G_c[n] @ W[n])
            for k in range(K):
                z = problem.H[n, k].conj() @ W[n]
                others = [j for j in range(N_s) if j != k]
                leak = cp.hstack([z[others], np.array([np.sqrt(problem.sigma2_comm)])])
                gamma = problem.gamma[n, k] * (1.0 + Constants.FEAS_MARGIN)
                constraints.append(cp.real(z[k]) >= np.sqrt(gamma) * cp.norm(leak, 2))
        power = sum(cp.sum_squares(W[n]) for n in range(N))
        constraints.append(power <= problem.P_tot * (1.0 - Constants.FEAS_MARGIN))
        solve_convex(cp.Problem(cp.Maximize(objective), constraints), 'BLP transmit SOCP')
        W_new = np.stack([W[n].value for n in range(N)])
        new_value = _dinkelbach_value(problem, W_new, u, eta)
        W_prev = W_new
        if abs(new_value - value) <= tol * max(1.0, abs(value)):
            break
        value = new_value
    else:
        logging.debug(f'CCP stopped after {max_iter} iterations')
    return W_prev


def blp_tx_update(problem, u, eta, method='sdr', W0=None):
    """Dinkelbach transmit step for fixed combiners

    Maximises sum_n tr((A_t,n - eta A_c,n) R_X,n) under the SINR, total
    power and R_X - sum_k R_k >= 0 constraints.

    Parameters
    ----------
    problem : BlpProblem
    u : numpy.ndarray
        Combiners (N, N_r).
    eta : float
        Dinkelbach parameter.
    method : {'sdr', 'ccp'}
        sdr: semidefinite relaxation with rank-one recovery of the user beams.
        ccp: convex-concave procedure on beamformers starting from `W0`.
    W0 : numpy.ndarray, optional
        Feasible beams (N, N_t, N_s), required by ccp.

    Returns
    -------
    TxUpdate

    Raises
    ------
    InfeasibleError
        If the SINR thresholds cannot be met within the power budget.

    """
    if method not in METHODS:
        raise ValueError('method must be "sdr" or "ccp"')
    if method == 'sdr':
        W, R_users = _sdr_step(problem, u, eta)
    else:
        if W0 is None:
            raise ValueError('ccp transmit step needs feasible starting beams W0')
        W = _ccp_step(problem, u, eta, W0)
        user_beams = W[:, :, :problem.K]
        R_users = np.einsum('ntk,nuk->nktu', user_beams, user_beams.conj())
    R_X = _covariance(W)
    return TxUpdate(R_X, R_users, W, _dinkelbach_value(problem, W, u, eta))


def mrc_illumination(problem):
    """Equal power per subcarrier on a single beam toward the target"""
    N, N_t = problem.N, problem.N_t
    W = np.zeros((N, N_t, problem.K + N_t), dtype=complex)
    for n in range(N):
        a = problem.a(n)
        W[n, :, problem.K] = np.sqrt(problem.P_tot * (1.0 - Constants.FEAS_MARGIN) / N) \
            * a / np.linalg.norm(a)
    return W


def _design(problem, W, kind, trace=None, converged=True, metadata=None):
    R_X = _covariance(W)
    u = blp_rx_update(problem, R_X)
    sinr, worst = blp_residuals(problem, W, R_X)
    return DesignSolution('blp', kind, blp_scnr(problem, R_X, u), R_X=R_X, W=W, u=u, sinr=sinr,
                          trace=trace or [], feasible=worst <= 1e-6, converged=converged,
                          metadata=metadata or {})


def _alternate(problem, W, method, max_outer, tol):
    R_X = _covariance(W)
    u = blp_rx_update(problem, R_X)
    scnr = blp_scnr(problem, R_X, u)
    _, worst = blp_residuals(problem, W, R_X)
    trace = [{'iter': 0, 'eta': scnr, 'scnr': scnr, 'worst_residual': worst}]
    converged, metadata = False, {}
    for it in range(1, max_outer + 1):
        eta = scnr
        try:
            step = blp_tx_update(problem, u, eta, method, W)
        except NumericalError as e:
            logging.warning(f'Transmit step {it} failed, keeping the last design: {e}')
            metadata['abort'] = str(e)
            break
        eta_new = blp_scnr(problem, step.R_X, u)
        u_new = blp_rx_update(problem, step.R_X)
        scnr_new = blp_scnr(problem, step.R_X, u_new)
        if scnr_new < scnr - Constants.DECREASE_GUARD * max(1.0, scnr):
            logging.warning(f'SCNR decreased from {scnr:.6g} to {scnr_new:.6g} at iteration {it}, '
                            'stopping at the previous design')
            metadata['abort'] = f'objective decrease at iteration {it}'
            break
        noise = sum(np.real(np.vdot(u[n], problem.R_eta[n] @ u[n])) for n in range(problem.N))
        target = _dinkelbach_value(problem, step.W, u, 0.0)
        metadata['root_residual'] = (step.objective - eta * noise) / max(target, 1e-300)
        W, u = step.W, u_new
        _, worst = blp_residuals(problem, W, step.R_X)
        trace.append({'iter': it, 'eta': eta_new, 'scnr': scnr_new, 'worst_residual': worst})
        done = abs(scnr_new - scnr) / max(1.0, scnr) < tol
        scnr = scnr_new
        if done:
            converged = True
            break
    if not converged and 'abort' not in metadata:
        logging.warning(f'Dinkelbach loop did not converge in {max_outer} iterations')
    return W, trace, converged, metadata


def blp_optimize(problem, init=None, max_outer=Constants.MAX_OUTER, tol=Constants.DINKELBACH_TOL,
                 method='sdr'):
    """Alternate MVDR receive and Dinkelbach transmit updates

    Parameters
    ----------
    problem : BlpProblem
    init : DesignSolution or sequence of DesignSolution, optional
        Feasible starting designs; every start is run and the best result
        kept. Defaults to the comm-only design when K > 0 and to MRC
        illumination otherwise.
    max_outer : int
    tol : float
        Stop when the relative SCNR change falls below `tol`.
    method : {'sdr', 'ccp'}

    Returns
    -------
    DesignSolution
        `trace` lists iter, eta, scnr and the worst constraint residual.

    Raises
    ------
    InfeasibleError

    """
    if init is None:
        if problem.K:
            from .baselines import comm_only
            init = [comm_only(problem)]
        else:
            init = [_design(problem, mrc_illumination(problem), 'mrc')]
    elif isinstance(init, DesignSolution):
        init = [init]
    best = None
    for start in init:
        W = np.asarray(start.W, dtype=complex)
        if W.shape[2] < problem.K + problem.N_t:
            pad = np.zeros(W.shape[:2] + (problem.K + problem.N_t - W.shape[2],), dtype=complex)
            W = np.concatenate([W, pad], axis=2)
        W, trace, converged, metadata = _alternate(problem, W, method, max_outer, tol)
        candidate = _design(problem, W, 'optimized', trace, converged,
                            dict(metadata, start=start.kind, method=method))
        logging.info(f'BLP start {start.kind}: SCNR {candidate.scnr_db:.2f} dB after '
                     f'{len(trace) - 1} iterations')
        if best is None or candidate.scnr > best.scnr:
            best = candidate
    if not best.feasible:
        raise InfeasibleError('optimised design violates the SINR or power constraints')
    best.metadata['starts'] = len(init)
    return best
