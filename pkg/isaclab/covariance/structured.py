"""Structured covariance models: Kronecker, Toeplitz, low-rank, STAR and thinned"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ..utils.linalg import hermitian
from .estimate import CovEstimate

MODELS = ('kronecker', 'toeplitz', 'low_rank', 'star', 'thinned')
CRITERIA = ('aic', 'mdl', 'threshold', 'energy')


def select_rank(eigenvalues, method='mdl', support=None, threshold=1e-2, energy=0.9):
    """Signal-subspace dimension from a descending eigenvalue sequence

    Parameters
    ----------
    eigenvalues : array_like
        Eigenvalues sorted in descending order.
    method : {'aic', 'mdl', 'threshold', 'energy'}
    support : int, optional
        Number of snapshots, required by AIC and MDL.
    threshold : float, optional
        Count eigenvalues above threshold * largest.
    energy : float, optional
        Smallest r capturing this fraction of the total.

    Returns
    -------
    int

    Notes
    -----
    For k candidate sources the log-likelihood term is
    -N (p - k) log(g_k / a_k), with g_k and a_k the geometric and arithmetic
    means of the p - k smallest eigenvalues. AIC adds k (2p - k) and MDL
    adds k (2p - k) log(N) / 2.

    """
    if method not in CRITERIA:
        raise ValueError('method must be "aic", "mdl", "threshold" or "energy"')
    lam = np.real(np.asarray(eigenvalues, dtype=float))
    p = lam.size
    top = max(lam[0], 0.0) if p else 0.0
    if top <= 0:
        return 0
    if method == 'threshold':
        return int(np.sum(lam > threshold * top))
    if method == 'energy':
        pos = np.maximum(lam, 0.0)
        return int(np.searchsorted(np.cumsum(pos) / pos.sum(), energy - 1e-12) + 1)
    if support is None:
        raise ValueError(f'{method.upper()} rank selection needs the sample support')
    lam = np.maximum(lam, top * 1e-15)
    scores = np.empty(p)
    for k in range(p):
        tail = lam[k:]
        ratio = np.exp(np.mean(np.log(tail))) / np.mean(tail)
        loglik = -support * (p - k) * np.log(ratio)
        free = k * (2 * p - k)
        if method == 'aic':
            scores[k] = 2 * loglik + 2 * free
        else:
            scores[k] = loglik + 0.5 * free * np.log(support)
    return int(np.argmin(scores))


def _matrix(R_or_est):
    return np.asarray(getattr(R_or_est, 'R', R_or_est))


def _wrap(R_or_est, R, estimator, domain=None, **metadata):
    base = R_or_est if isinstance(R_or_est, CovEstimate) else None
    support = base.support if base is not None else None
    if domain is None:
        domain = base.domain if base is not None else 'spatial'
    meta = dict(base.metadata) if base is not None else {}
    meta.pop('clipped_eigenvalues', None)
    meta.update(metadata)
    return CovEstimate(R, domain, estimator, support, meta)


def kronecker_fit(R_or_est, dims):
    """Nearest R_sp kron R_fr in Frobenius norm

    Uses the rearrangement of R into a (p^2, q^2) matrix whose best rank-one
    approximation gives vec(R_sp) vec(R_fr)^T. R_fr is scaled to trace q.

    Returns
    -------
    CovEstimate
        With the factors in metadata['R_sp'] and metadata['R_fr'].

    """
    R = _matrix(R_or_est)
    p, q = (int(d) for d in dims)
    if p * q != R.shape[0]:
        raise ValueError(f'Kronecker dims {dims} do not multiply to {R.shape[0]}')
    rearranged = R.reshape(p, q, p, q).transpose(0, 2, 1, 3).reshape(p * p, q * q)
    U, s, Vh = np.linalg.svd(rearranged, full_matrices=False)
    A = (s[0] * U[:, 0]).reshape(p, p)
    B = Vh[0].reshape(q, q)
    scale = np.trace(B) / q
    if abs(scale) == 0:
        raise ValueError('frequency factor has zero trace')
    A, B = hermitian(A * scale), hermitian(B / scale)
    return _wrap(R_or_est, np.kron(A, B), 'kronecker', 'space_frequency', R_sp=A, R_fr=B)


def toeplitz_fit(R_or_est, band=None):
    """Hermitian Toeplitz fit by diagonal averaging

    r(k) = mean_i R[i, i + k]; with `band` only lags |k| <= band are kept.
    """
    R = _matrix(R_or_est)
    dim = R.shape[0]
    r = np.array([np.mean(np.diagonal(R, k)) for k in range(dim)])
    if band is not None:
        r[int(band) + 1:] = 0.0
    r[0] = np.real(r[0])
    T = sla.toeplitz(r.conj(), r)
    return _wrap(R_or_est, T, 'toeplitz', band=band)


def low_rank_fit(R_or_est, criterion='mdl', support=None, rank=None):
    """U_r (Lambda_r - sigma^2) U_r^H + sigma^2 I with sigma^2 the mean discarded eigenvalue

    The kept eigenvalues are those of R, so an exact low-rank-plus-noise
    input is reproduced.

    Raises
    ------
    ValueError
        If the selected rank leaves no noise floor (r = dim).

    """
    R = _matrix(R_or_est)
    dim = R.shape[0]
    lam, U = np.linalg.eigh(hermitian(R))
    lam, U = lam[::-1], U[:, ::-1]
    if rank is None:
        if support is None:
            support = getattr(R_or_est, 'support', None)
        rank = select_rank(lam, criterion, support)
    if rank >= dim:
        raise ValueError(f'{criterion} selected r = {rank} = dim, no noise floor left')
    sigma2 = float(np.mean(lam[rank:]))
    Ur = U[:, :rank]
    R_lr = (Ur * (lam[:rank] - sigma2)) @ Ur.conj().T + sigma2 * np.eye(dim)
    logging.debug(f'Low-rank fit kept r={rank} with noise floor {sigma2:.3g}')
    return _wrap(R_or_est, R_lr, 'low_rank', rank=int(rank), sigma2=sigma2, criterion=criterion)


@dataclass
class StarModel:
    """Space-time autoregressive annihilator H = [H_0 ... H_{L_AR - 1}]

    H has shape (M', N_r L_AR) and `residual` is ||H E||_F on the training data.
    """

    H: np.ndarray
    L_AR: int
    residual: float
    singular_values: np.ndarray = None

    @property
    def taps(self):
        N_r = self.H.shape[1] // self.L_AR
        return [self.H[:, i * N_r:(i + 1) * N_r] for i in range(self.L_AR)]

    def apply(self, Y):
        """sum_i H_i y[l + i] over every window of an (N_r, L) snapshot block"""
        return self.H @ star_windows(Y, self.L_AR)


def star_windows(Y, L_AR, L_win=None):
    """E = [vec(Y_1), ..., vec(Y_Lwin)] with Y_l = [y[l], ..., y[l + L_AR - 1]]"""
    Y = np.asarray(Y)
    N_r, L = Y.shape
    L_win = L - L_AR + 1 if L_win is None else int(L_win)
    if L_win < 1 or L_win + L_AR - 1 > L:
        raise ValueError(f'{L} snapshots cannot hold {L_win} windows of order {L_AR}')
    return np.stack([Y[:, l:l + L_AR].reshape(-1, order='F') for l in range(L_win)], axis=1)


def star_fit(snapshots, L_AR, M_prime, L_win=None):
    """Fit a STAR annihilator to slow-time snapshots (N_r, L)

    The rows of H are the left singular vectors of E belonging to the
    M' smallest singular values.
    """
    Y = np.asarray(snapshots)
    N_r, L = Y.shape
    L_win = L - L_AR + 1 if L_win is None else int(L_win)
    if L_win < L_AR:
        raise ValueError(f'STAR needs L_win >= L_AR, got {L_win} < {L_AR}')
    if not 1 <= M_prime <= N_r:
        raise ValueError(f'M\' must lie in [1, {N_r}], got {M_prime}')
    E = star_windows(Y, L_AR, L_win)
    U, s, _ = np.linalg.svd(E, full_matrices=True)
    H = U[:, -M_prime:].conj().T
    return StarModel(H, int(L_AR), float(np.linalg.norm(H @ E)), s)


def selection_matrix(indices, dim):
    indices = np.asarray(indices, dtype=int)
    S = np.zeros((indices.size, dim))
    S[np.arange(indices.size), indices] = 1.0
    return S


def thinned(R_or_est, selection):
    """Principal submatrix S_sel R S_sel^H for an index list or binary selection matrix"""
    R = _matrix(R_or_est)
    S = np.asarray(selection)
    if S.ndim == 1:
        S = selection_matrix(S, R.shape[0])
    if S.shape[1] != R.shape[0] or not np.all((S == 0) | (S == 1)):
        raise ValueError('selection must be a binary K x dim matrix')
    return _wrap(R_or_est, S @ R @ S.T, 'thinned', selected=int(S.shape[0]))


def structured_fit(R_or_snapshots, model, **params):
    """Dispatch to one structured model

    kronecker(dims), toeplitz(band), low_rank(criterion, support, rank),
    star(L_AR, M_prime, L_win) on snapshots, thinned(selection).
    """
    if model not in MODELS:
        raise ValueError('model must be "kronecker", "toeplitz", "low_rank", "star" or "thinned"')
    if model == 'kronecker':
        return kronecker_fit(R_or_snapshots, **params)
    if model == 'toeplitz':
        return toeplitz_fit(R_or_snapshots, **params)
    if model == 'low_rank':
        return low_rank_fit(R_or_snapshots, **params)
    if model == 'star':
        return star_fit(R_or_snapshots, **params)
    return thinned(R_or_snapshots, **params)
