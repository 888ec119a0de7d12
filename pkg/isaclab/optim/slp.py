"""Symbol-level precoding with space-time adaptive reception (SLP-STAP)"""
import logging

import cvxpy as cp
import numpy as np
import scipy.linalg as sla

from ..constants import Constants
from ..errors import InfeasibleError, NumericalError
from ..utils.linalg import hermitian, load_diagonal, mvdr
from ..waveform.precoding import TransmitRecord
from .blp import _psd_factor
from .problem import DesignSolution, slp_residuals, slp_scnr, solve_convex


def slp_rx_update(problem, X, loading=Constants.LOADING):
    """STAP filters w_n = R_I^-1 X v_t / (v_t^H X^H R_I^-1 X v_t), R_I = X V X^H + R_eta"""
    tx = TransmitRecord(np.asarray(X))
    w = np.zeros((problem.N, problem.L * problem.N_r), dtype=complex)
    for n in range(problem.N):
        X_n = tx.X_n(n, problem.N_r)
        R_I = hermitian(X_n @ problem.V_st[n] @ X_n.conj().T) + problem.R_eta[n]
        w[n], _ = mvdr(load_diagonal(R_I, loading), tx.apply_n(n, problem.v_t(n), problem.N_r))
    return w


def _selector(w_n, L, N_r, N_t):
    """E with X^H w = E conj(x) for the stacked waveform x[l N_t + j]"""
    W = np.asarray(w_n).reshape(L, N_r)
    return sla.block_diag(*[np.kron(W[l][:, None], np.eye(N_t)) for l in range(L)])


def waveform_quadratics(problem, w):
    """Per-subcarrier (g_n, A_c,n, c_n) with
    w^H X v_t = g^T x, w^H X V X^H w = x^H A_c x and c = w^H R_eta w"""
    terms = []
    for n in range(problem.N):
        E = _selector(w[n], problem.L, problem.N_r, problem.N_t)
        g = E.conj().T @ problem.v_t(n)
        A_c = hermitian(np.conj(E.conj().T @ problem.V_st[n] @ E))
        c = float(np.real(np.vdot(w[n], problem.R_eta[n] @ w[n])))
        terms.append((g, A_c, c))
    return terms


def _margin_rows(problem, n):
    """Matrix M with r = M x, r[l K + k] = h_k^H x[l] conj(s_k[l])"""
    L, K, N_t = problem.L, problem.K, problem.N_t
    M = np.zeros((L, K, L, N_t), dtype=complex)
    for l in range(L):
        M[l, :, l, :] = np.conj(problem.S[n, l])[:, None] * problem.H[n].conj()
    return M.reshape(L * K, L * N_t)


def _feasible_set(problem, x):
    """Safety-margin and energy constraints on the stacked waveforms"""
    phi = np.pi / problem.omega
    constraints = []
    for n in range(problem.N):
        if problem.K == 0:
            continue
        r = _margin_rows(problem, n) @ x[n]
        floor = np.tile(problem.gamma_bar[n] * (1.0 + Constants.FEAS_MARGIN), problem.L)
        constraints += [np.sin(phi) * cp.real(r) - np.cos(phi) * cp.imag(r) >= floor,
                        np.sin(phi) * cp.real(r) + np.cos(phi) * cp.imag(r) >= floor]
    energy = sum(cp.sum_squares(x[n]) for n in range(problem.N))
    return constraints, energy


def _variables(problem):
    return [cp.Variable(problem.L * problem.N_t, complex=True) for _ in range(problem.N)]


def _stack(problem, x):
    return np.stack([v.value.reshape(problem.L, problem.N_t) for v in x])


def slp_min_power(problem):
    """Minimum-energy waveforms meeting every safety margin (feasibility probe)

    Raises
    ------
    InfeasibleError
        If the margins need more than the energy budget.

    """
    if problem.K == 0:
        return np.zeros((problem.N, problem.L, problem.N_t), dtype=complex)
    x = _variables(problem)
    constraints, energy = _feasible_set(problem, x)
    solve_convex(cp.Problem(cp.Minimize(energy), constraints), 'minimum-power SLP')
    X = _stack(problem, x)
    needed = float(np.sum(np.abs(X) ** 2))
    if needed > problem.P_tot * (1.0 - Constants.FEAS_MARGIN):
        raise InfeasibleError(f'safety margins need energy {needed:.4g} above the budget {problem.P_tot:.4g}')
    return X


def _linear_start(problem, C):
    """Feasible waveforms maximising Re sum_n C_n^H x_n"""
    x = _variables(problem)
    constraints, energy = _feasible_set(problem, x)
    constraints.append(energy <= problem.P_tot * (1.0 - Constants.FEAS_MARGIN))
    objective = sum(cp.real(C[n].conj() @ x[n]) for n in range(problem.N))
    solve_convex(cp.Problem(cp.Maximize(objective), constraints), 'SLP start')
    return _stack(problem, x)


def initial_waveforms(problem, starts=Constants.SLP_STARTS, rng=None):
    """Feasible starting waveforms for the multistart CCP

    The minimum-power solution scaled to the full budget (margins scale with
    it), the feasible waveform best aligned with the target illumination and
    `starts - 2` feasible waveforms along random directions.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    budget = problem.P_tot * (1.0 - Constants.FEAS_MARGIN)
    X_min = slp_min_power(problem)
    energy = float(np.sum(np.abs(X_min) ** 2))
    if energy > 0:
        found = [X_min * np.sqrt(budget / energy)]
    else:
        found = [np.stack([np.tile(problem.a(n), (problem.L, 1)) for n in range(problem.N)])]
        found[0] = found[0] * np.sqrt(budget / np.sum(np.abs(found[0]) ** 2))
    target = [np.tile(problem.a(n), problem.L) for n in range(problem.N)]
    found.append(_linear_start(problem, target))
    for _ in range(max(starts - 2, 0)):
        C = [rng.standard_normal(problem.L * problem.N_t) + 1j * rng.standard_normal(problem.L * problem.N_t)
             for _ in range(problem.N)]
        found.append(_linear_start(problem, C))
    return found[:max(starts, 1)]


def _dinkelbach_value(problem, terms, X, eta):
    value = 0.0
    for n, (g, A_c, _) in enumerate(terms):
        x = X[n].reshape(-1)
        value += problem.sigma2_t[n] * np.abs(g @ x) ** 2 - eta * np.real(np.vdot(x, A_c @ x))
    return float(value)


def slp_tx_update(problem, w, eta, X0, tol=Constants.CCP_TOL, max_iter=Constants.CCP_MAX_ITER):
    """Dinkelbach waveform step for fixed STAP filters by the convex-concave procedure

    |g^T x|^2 is linearised around the previous iterate; each subproblem is
    an SOCP with the affine safety-margin constraints and the energy budget.
    """
    terms = waveform_quadratics(problem, w)
    G = [_psd_factor(A_c) for _, A_c, _ in terms]
    X_prev = np.asarray(X0, dtype=complex)
    value = _dinkelbach_value(problem, terms, X_prev, eta)
    for it in range(max_iter):
        x = _variables(problem)
        constraints, energy = _feasible_set(problem, x)
        constraints.append(energy <= problem.P_tot * (1.0 - Constants.FEAS_MARGIN))
        objective = 0
        for n, (g, _, _) in enumerate(terms):
            slope = 2.0 * problem.sigma2_t[n] * np.conj(g @ X_prev[n].reshape(-1)) * g
            objective += cp.real(slope @ x[n]) - eta * cp.sum_squares(G[n] @ x[n])
        solve_convex(cp.Problem(cp.Maximize(objective), constraints), 'SLP waveform SOCP')
        X_new = _stack(problem, x)
        new_value = _dinkelbach_value(problem, terms, X_new, eta)
        X_prev = X_new
        if abs(new_value - value) <= tol * max(1.0, abs(value)):
            break
        value = new_value
    return X_prev


def _alternate(problem, X, max_outer, tol):
    w = slp_rx_update(problem, X)
    scnr = slp_scnr(problem, X, w)
    _, worst = slp_residuals(problem, X)
    trace = [{'iter': 0, 'eta': scnr, 'scnr': scnr, 'worst_residual': worst}]
    converged, metadata = False, {}
    for it in range(1, max_outer + 1):
        try:
            X_new = slp_tx_update(problem, w, scnr, X)
        except NumericalError as e:
            logging.warning(f'Waveform step {it} failed, keeping the last design: {e}')
            metadata['abort'] = str(e)
            break
        eta_new = slp_scnr(problem, X_new, w)
        w_new = slp_rx_update(problem, X_new)
        scnr_new = slp_scnr(problem, X_new, w_new)
        if scnr_new < scnr - Constants.DECREASE_GUARD * max(1.0, scnr):
            logging.warning(f'SLP SCNR decreased from {scnr:.6g} to {scnr_new:.6g} at iteration {it}')
            metadata['abort'] = f'objective decrease at iteration {it}'
            break
        X, w = X_new, w_new
        _, worst = slp_residuals(problem, X)
        trace.append({'iter': it, 'eta': eta_new, 'scnr': scnr_new, 'worst_residual': worst})
        done = abs(scnr_new - scnr) / max(1.0, scnr) < tol
        scnr = scnr_new
        if done:
            converged = True
            break
    return X, w, trace, converged, metadata


def slp_stap_optimize(problem, starts=Constants.SLP_STARTS, max_outer=Constants.MAX_OUTER,
                      tol=Constants.DINKELBACH_TOL, rng=None):
    """Alternate STAP receive filters and CCP waveform updates from several feasible starts

    Parameters
    ----------
    problem : SlpProblem
    starts : int, optional
        Number of feasible starting waveforms.
    max_outer : int, optional
    tol : float, optional
        Relative SCNR change that stops the alternation.
    rng : numpy.random.Generator, optional
        Random start directions.

    Returns
    -------
    DesignSolution
        Waveforms X (N, L, N_t), filters w, safety margins in `sinr`.

    Raises
    ------
    InfeasibleError
        If the margins cannot be met within the energy budget.

    """
    best = None
    for k, X0 in enumerate(initial_waveforms(problem, starts, rng)):
        X, w, trace, converged, metadata = _alternate(problem, X0, max_outer, tol)
        margins, worst = slp_residuals(problem, X)
        candidate = DesignSolution('slp', 'slp_stap', slp_scnr(problem, X, w), X=X, w=w,
                                   sinr=margins, trace=trace, feasible=worst <= 1e-6,
                                   converged=converged, metadata=dict(metadata, start=k))
        logging.info(f'SLP start {k}: SCNR {candidate.scnr_db:.2f} dB after {len(trace) - 1} iterations')
        if candidate.feasible and (best is None or candidate.scnr > best.scnr):
            best = candidate
    if best is None:
        raise InfeasibleError('no SLP start produced a design meeting the safety margins')
    return best
