"""Waveform-independent clutter kernels: closed forms, learning and prediction"""
import logging
from dataclasses import dataclass, field

import numpy as np

from ..channel.arrays import spatial_steering
from ..channel.steering import space_time_steering
from ..utils.linalg import hermitian, project_psd, unvec, vec
from .estimate import CovEstimate

KERNEL_DOMAINS = ('space_time', 'spatial_map')
PENALTIES = ('none', 'trace', 'low_rank')


@dataclass
class ClutterKernel:
    """Inner clutter kernel

    space_time : V of size L N_r N_t with R_cc(X) = X V X^H
    spatial_map : V of shape (N_r^2, N_t^2) with vec(R_cc) = V vec(W W^H)
    """

    V: np.ndarray
    domain: str = 'space_time'
    penalty: str = 'none'
    weight: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.domain not in KERNEL_DOMAINS:
            raise ValueError('kernel domain must be "space_time" or "spatial_map"')
        if self.penalty not in PENALTIES:
            raise ValueError('penalty must be "none", "trace" or "low_rank"')
        V = np.asarray(self.V, dtype=complex)
        if self.domain == 'space_time':
            if V.ndim != 2 or V.shape[0] != V.shape[1]:
                raise ValueError(f'space-time kernel must be square, got {V.shape}')
            V, _ = project_psd(V)
        self.V = V


def space_time_kernel(scene, n):
    """Closed-form V_n = sum_c sigma^2_{c,n} v_n v_n^H over the cold-clutter patches"""
    dim = scene.grid.L * scene.N_r * scene.N_t
    V = np.zeros((dim, dim), dtype=complex)
    for c in scene.clutter:
        v = space_time_steering(c.theta_tx, c.theta, c.f_D, n, scene.tx_array, scene.rx_array,
                                scene.grid)
        V += c.profile[n] * np.outer(v, v.conj())
    return ClutterKernel(V, 'space_time', metadata={'subcarrier': int(n), 'source': 'scene'})


def spatial_kernel(scene, n):
    """Closed-form V^sp_n = sum_c sigma^2_{c,n} vec(b b^H) vec(a a^H)^H"""
    V = np.zeros((scene.N_r ** 2, scene.N_t ** 2), dtype=complex)
    for c in scene.clutter:
        a = spatial_steering(scene.tx_array, c.theta_tx, n, scene.grid)
        b = spatial_steering(scene.rx_array, c.theta, n, scene.grid)
        V += c.profile[n] * np.outer(vec(np.outer(b, b.conj())), vec(np.outer(a, a.conj())).conj())
    return ClutterKernel(V, 'spatial_map', metadata={'subcarrier': int(n), 'source': 'scene'})


def clutter_cov_from_scene(scene, n, W):
    """sum_c sigma^2_{c,n} (a^H W W^H a) b b^H for precoder W_n (N_t x N_s)"""
    W = np.asarray(W)
    R = np.zeros((scene.N_r, scene.N_r), dtype=complex)
    for c in scene.clutter:
        a = spatial_steering(scene.tx_array, c.theta_tx, n, scene.grid)
        b = spatial_steering(scene.rx_array, c.theta, n, scene.grid)
        illum = np.sum(np.abs(a.conj() @ W) ** 2)
        R += c.profile[n] * illum * np.outer(b, b.conj())
    return CovEstimate(R, 'spatial', 'scene_model', metadata={'subcarrier': int(n)})


def _objective(V, pairs, penalty, weight):
    f = sum(np.linalg.norm(R - X @ V @ X.conj().T) ** 2 for R, X in pairs)
    if penalty != 'none':
        # trace and nuclear norm coincide on the PSD cone
        f += weight * np.real(np.trace(V))
    return float(f)


def _gradient(V, pairs):
    return -2 * sum(X.conj().T @ (R - X @ V @ X.conj().T) @ X for R, X in pairs)


def _learn_space_time(pairs, penalty, weight, tol, max_iter):
    dim = pairs[0][1].shape[1]
    lipschitz = 2 * sum(np.linalg.norm(X, 2) ** 4 for _, X in pairs)
    if lipschitz == 0:
        raise ValueError('all probing matrices are zero')
    step = 1.0 / lipschitz
    shift = step * weight if penalty != 'none' else 0.0
    V = np.zeros((dim, dim), dtype=complex)
    Z, t = V, 1.0
    f = _objective(V, pairs, penalty, weight)
    converged = False
    for it in range(1, max_iter + 1):
        G = _gradient(Z, pairs)
        w, U = np.linalg.eigh(hermitian(Z - step * G))
        V_new = (U * np.maximum(w - shift, 0.0)) @ U.conj().T
        f_new = _objective(V_new, pairs, penalty, weight)
        if f_new > f:
            # momentum overshoot: restart from the last accepted iterate
            Z, t = V, 1.0
            continue
        t_new = 0.5 * (1 + np.sqrt(1 + 4 * t ** 2))
        Z = V_new + ((t - 1) / t_new) * (V_new - V)
        decrease = f - f_new
        V, t, f_prev, f = V_new, t_new, f, f_new
        if f <= 1e-30 or decrease <= tol * f_prev:
            converged = True
            break
    if not converged:
        logging.warning(f'Kernel fit stopped at max_iter={max_iter}, objective {f:.3g}')
    return V, {'converged': converged, 'iterations': it, 'objective': f}


def learn_inner_kernel(training, domain='space_time', penalty='none', weight=0.0, R_eta=None,
                       tol=1e-8, max_iter=2000):
    """Fit a waveform-independent clutter kernel across probing realisations

    Parameters
    ----------
    training : list of tuple
        space_time : (R_hat, X) with R_hat the (L N_r)^2 covariance of one
        CPI and X its (L N_r, L N_r N_t) probing matrix.
        spatial : (R_hat_n, W_n) with W_n the N_t x N_s precoder.
    domain : {'space_time', 'spatial'}
    penalty : {'none', 'trace', 'low_rank'}
        Penalty P(V) weighted by `weight`.
    R_eta : numpy.ndarray or CovEstimate, optional
        Waveform-independent disturbance covariance subtracted from every
        R_hat before fitting; negative eigenvalues are clipped.
    tol : float, optional
        Relative objective decrease that stops the projected gradient.
    max_iter : int, optional

    Returns
    -------
    ClutterKernel

    Raises
    ------
    ValueError
        On an empty training list or all-zero probing matrices.

    Notes
    -----
    'low_rank' and 'trace' share one proximal step. The kernel is kept
    PSD, and on the PSD cone the nuclear norm equals the trace, so both
    reduce to shifting the eigenvalues down by the step times `weight`
    and clipping at zero.

    """
    if not training:
        raise ValueError('kernel learning needs at least one CPI')
    if domain not in ('space_time', 'spatial'):
        raise ValueError('domain must be "space_time" or "spatial"')
    if penalty not in PENALTIES:
        raise ValueError('penalty must be "none", "trace" or "low_rank"')
    pairs = []
    clipped = 0
    for R_hat, X in training:
        R = np.asarray(getattr(R_hat, 'R', R_hat), dtype=complex)
        if R_eta is not None:
            R, n_clipped = project_psd(R - np.asarray(getattr(R_eta, 'R', R_eta)))
            clipped += n_clipped
        pairs.append((R, np.asarray(X, dtype=complex)))
    if clipped:
        logging.info(f'Clipped {clipped} negative eigenvalues after noise subtraction')

    if domain == 'spatial':
        Rmat = np.stack([vec(R) for R, _ in pairs], axis=1)
        Wmat = np.stack([vec(W @ W.conj().T) for _, W in pairs], axis=1)
        if not np.any(Wmat):
            raise ValueError('all probing matrices are zero')
        V = np.linalg.lstsq(Wmat.T, Rmat.T, rcond=None)[0].T
        return ClutterKernel(V, 'spatial_map', penalty, weight,
                             {'cpis': len(pairs), 'clipped_eigenvalues': clipped})

    V, info = _learn_space_time(pairs, penalty, weight, tol, max_iter)
    info.update(cpis=len(pairs), clipped_eigenvalues=clipped)
    return ClutterKernel(V, 'space_time', penalty, weight, info)


def predict_clutter_cov(kernel, waveform, covariance=False):
    """Clutter covariance a kernel predicts for a waveform

    Parameters
    ----------
    kernel : ClutterKernel
    waveform : numpy.ndarray
        space_time kernels take the probing matrix X_n; spatial_map kernels
        take the precoder W_n, or R_X,n when `covariance` is True.

    Returns
    -------
    CovEstimate
        X V X^H, or unvec(V vec(W W^H)).

    """
    X = np.asarray(waveform, dtype=complex)
    V = kernel.V
    if kernel.domain == 'space_time':
        if X.ndim != 2 or X.shape[1] != V.shape[0]:
            raise ValueError(f'probing matrix {X.shape} does not match kernel size {V.shape[0]}')
        return CovEstimate(X @ V @ X.conj().T, 'space_time', 'kernel')
    R_X = X if covariance else X @ X.conj().T
    N_t = int(round(np.sqrt(V.shape[1])))
    N_r = int(round(np.sqrt(V.shape[0])))
    if R_X.shape != (N_t, N_t):
        raise ValueError(f'transmit covariance {R_X.shape} does not match kernel N_t={N_t}')
    return CovEstimate(unvec(V @ vec(R_X), (N_r, N_r)), 'spatial', 'kernel')
