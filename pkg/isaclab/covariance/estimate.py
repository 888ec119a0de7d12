"""Sample covariance estimation and regularisation of disturbance snapshots"""
import logging
from dataclasses import dataclass, field

import numpy as np

from ..constants import Constants
from ..rx.ranging import range_focus
from ..utils.linalg import exchange, hermitian, hermitian_solve, project_psd

DOMAINS = ('spatial', 'space_time', 'space_frequency')
SCM_MODES = ('per_subcarrier', 'subband', 'range_gated')
REGULARIZERS = ('oas', 'fba', 'spatial_smoothing', 'diag_load')


@dataclass
class CovEstimate:
    """Hermitian PSD covariance tagged with its domain and provenance

    Attributes
    ----------
    R : numpy.ndarray
        Covariance matrix, Hermitised and eigen-clipped at zero on creation.
    domain : {'spatial', 'space_time', 'space_frequency'}
    estimator : str
        Name of the estimator that produced R.
    support : int
        Number of training snapshots behind the estimate.
    metadata : dict
        Subband, range gate, clipping and convergence information.

    """

    R: np.ndarray
    domain: str = 'spatial'
    estimator: str = 'scm'
    support: int = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError('domain must be "spatial", "space_time" or "space_frequency"')
        R = np.asarray(self.R, dtype=complex)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise ValueError(f'covariance must be square, got shape {R.shape}')
        if not np.all(np.isfinite(R)):
            raise ValueError('covariance has non-finite entries')
        self.R, n_clipped = project_psd(R)
        if n_clipped:
            self.metadata.setdefault('clipped_eigenvalues', n_clipped)

    @property
    def dim(self):
        return self.R.shape[0]

    @property
    def rmb(self):
        """Reed-Mallett-Brennan guideline N_tr >= 2D"""
        return self.support is not None and self.support >= 2 * self.dim

    def replace(self, R, estimator, **metadata):
        meta = dict(self.metadata)
        meta.update(metadata)
        meta.pop('clipped_eigenvalues', None)
        return CovEstimate(R, self.domain, estimator, self.support, meta)


def _outer_mean(Y):
    Y = np.asarray(Y)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[1] == 0:
        raise ValueError('empty training set')
    return Y @ Y.conj().T / Y.shape[1]


def subband_width(grid, freq_model=None):
    """Largest N_sb with N_sb * delta_f <= B_c, N/8 without a frequency model"""
    if freq_model is None:
        return max(grid.N // 8, 1)
    return int(min(max(np.floor(freq_model.B_c / grid.delta_f), 1), grid.N))


def subband_sets(grid, width):
    """Consecutive subcarrier index sets N_b of the given width"""
    if width < 1:
        raise ValueError(f'subband width must be >= 1, got {width}')
    return [np.arange(start, min(start + width, grid.N)) for start in range(0, grid.N, width)]


def _as_cube(snapshots):
    return np.asarray(getattr(snapshots, 'y', snapshots))


def training_gates(cell, n_gates, guard=Constants.GATE_GUARD, train=Constants.GATE_TRAIN):
    """Range gates used to train for `cell`: up to `train` per side beyond `guard` guard cells"""
    lo = np.arange(cell - guard - train, cell - guard)
    hi = np.arange(cell + guard + 1, cell + guard + train + 1)
    gates = np.concatenate([lo, hi])
    return gates[(gates >= 0) & (gates < n_gates)]


def range_gate_snapshots(cube, tau_grid, grid=None, subband=None):
    """Range-gated spatial snapshots y_tau[l], shape (N_r, n_gates, L)

    `cube` is a DataCube or an (N_r, N, L) array of de-randomised
    per-subcarrier snapshots. With `subband` the focusing uses only those
    subcarriers and the 1/sqrt(N_sb) scaling.
    """
    grid = getattr(cube, 'grid', grid)
    y = _as_cube(cube)
    focused = range_focus(np.transpose(y, (1, 0, 2)), tau_grid, grid, subband)
    return np.transpose(focused, (1, 0, 2))


def sample_covariance(snapshots, mode='per_subcarrier', n=None, subcarriers=None, cell=None,
                      guard=Constants.GATE_GUARD, train=Constants.GATE_TRAIN, domain='spatial'):
    """Sample covariance matrix over a training set

    Parameters
    ----------
    snapshots : numpy.ndarray or DataCube
        per_subcarrier : (dim, N_tr) columns, or a cube together with `n`.
        subband : cube (N_r, N, L) averaged over `subcarriers` and all symbols.
        range_gated : range-gated snapshots (N_r, n_gates, L), see
        `range_gate_snapshots`.
    mode : {'per_subcarrier', 'subband', 'range_gated'}
    n : int, optional
        Subcarrier of a cube in per_subcarrier mode.
    subcarriers : array_like, optional
        Subband index set N_b. Defaults to the first subband of width
        `subband_width`.
    cell : int, optional
        Range gate under test; it and `guard` gates per side are excluded.
    guard, train : int, optional
        Guard and training gates per side.
    domain : str, optional
        Domain tag of the result.

    Returns
    -------
    CovEstimate
        `metadata['rmb']` records whether N_tr >= 2D holds.

    Raises
    ------
    ValueError
        On an unknown mode or an empty training set.

    """
    if mode not in SCM_MODES:
        raise ValueError('mode must be "per_subcarrier", "subband" or "range_gated"')
    meta = {'mode': mode}
    if mode == 'per_subcarrier':
        if n is not None:
            Y = _as_cube(snapshots)[:, n, :]
            meta['subcarrier'] = int(n)
        else:
            Y = np.asarray(snapshots)
            Y = Y[:, None] if Y.ndim == 1 else Y
    elif mode == 'subband':
        y = _as_cube(snapshots)
        if subcarriers is None:
            grid = getattr(snapshots, 'grid', None)
            width = subband_width(grid) if grid is not None else max(y.shape[1] // 8, 1)
            subcarriers = np.arange(min(width, y.shape[1]))
        subcarriers = np.asarray(subcarriers, dtype=int)
        Y = y[:, subcarriers, :].reshape(y.shape[0], -1)
        meta['subcarriers'] = subcarriers.tolist()
    else:
        if cell is None:
            raise ValueError('range_gated mode needs the cell under test')
        y = np.asarray(snapshots)
        gates = training_gates(cell, y.shape[1], guard, train)
        Y = y[:, gates, :].reshape(y.shape[0], -1)
        meta.update(cell=int(cell), guard=guard, train=train, gates=gates.tolist())
    if Y.shape[1] == 0:
        raise ValueError(f'empty training set in {mode} mode')
    R = _outer_mean(Y)
    meta['rmb'] = bool(Y.shape[1] >= 2 * Y.shape[0])
    if not meta['rmb']:
        logging.debug(f'SCM support {Y.shape[1]} below the RMB guideline 2D = {2 * Y.shape[0]}')
    return CovEstimate(R, domain, 'scm', int(Y.shape[1]), meta)


def oas_weight(R, n_ts):
    """Oracle-approximating shrinkage weight alpha, clipped to [0, 1]"""
    dim = R.shape[0]
    tr = np.real(np.trace(R))
    tr2 = np.real(np.sum(np.abs(R) ** 2))
    denom = (n_ts + 1 - 2 / dim) * (tr2 - tr ** 2 / dim)
    num = (1 - 2 / dim) * tr2 + tr ** 2
    if denom <= 1e-12 * max(num, 1e-300):
        return 1.0
    return float(np.clip(num / denom, 0.0, 1.0))


def regularize(R_scm, method, n_ts=None, F=None, eps=Constants.LOADING, array=None):
    """Regularise an SCM

    Parameters
    ----------
    R_scm : CovEstimate
    method : {'oas', 'fba', 'spatial_smoothing', 'diag_load'}
    n_ts : int, optional
        Training size for OAS; defaults to the estimate's support.
    F : int, optional
        Subarray length for spatial smoothing.
    eps : float, optional
        Relative loading level for diag_load.
    array : ArrayGeometry, optional
        Receive array; fba and spatial smoothing require a ULA.

    Returns
    -------
    CovEstimate

    Notes
    -----
    oas : (1 - alpha) R + alpha mu I, mu = tr(R)/dim
    fba : (R + J R* J) / 2
    spatial_smoothing : mean of the N_r - F + 1 forward subarray blocks
    diag_load : R + eps tr(R)/dim I

    """
    if method not in REGULARIZERS:
        raise ValueError('method must be "oas", "fba", "spatial_smoothing" or "diag_load"')
    R = R_scm.R
    dim = R.shape[0]
    if method in ('fba', 'spatial_smoothing'):
        if array is not None and array.kind != 'ula_half_lambda':
            raise ValueError(f'{method} needs a uniform linear array')
        if R_scm.domain != 'spatial':
            raise ValueError(f'{method} applies to spatial covariances only')
    if method == 'oas':
        n_ts = R_scm.support if n_ts is None else n_ts
        if n_ts is None:
            raise ValueError('OAS needs the training size n_ts')
        alpha = oas_weight(R, n_ts)
        mu = np.real(np.trace(R)) / dim
        return R_scm.replace((1 - alpha) * R + alpha * mu * np.eye(dim), 'oas', alpha=alpha)
    if method == 'fba':
        J = exchange(dim)
        return R_scm.replace(0.5 * (R + J @ R.conj() @ J), 'fba')
    if method == 'spatial_smoothing':
        if F is None or not 1 <= F <= dim:
            raise ValueError(f'subarray length F must lie in [1, {dim}], got {F}')
        count = dim - F + 1
        R_ss = sum(R[i:i + F, i:i + F] for i in range(count)) / count
        return R_scm.replace(R_ss, 'spatial_smoothing', F=F, subarrays=count)
    level = np.real(np.trace(R)) / dim
    return R_scm.replace(R + eps * level * np.eye(dim), 'diag_load', eps=eps)


def tyler_shape(snapshots, tol=1e-8, max_iter=200, domain='spatial'):
    """Tyler's M-estimator of the normalised shape matrix

    Parameters
    ----------
    snapshots : numpy.ndarray
        (dim, N) columns, N > dim, no zero column.
    tol : float, optional
        Relative Frobenius change that stops the fixed-point iteration.
    max_iter : int, optional

    Returns
    -------
    CovEstimate
        Shape matrix with trace dim; `metadata['converged']` is False when
        max_iter was reached (the last iterate is returned).

    """
    Y = np.asarray(snapshots)
    dim, N = Y.shape
    if N <= dim:
        raise ValueError(f'Tyler needs more snapshots than dimensions, got {N} <= {dim}')
    if np.any(np.sum(np.abs(Y) ** 2, axis=0) == 0):
        raise ValueError('zero snapshot in Tyler training data')
    sigma = np.eye(dim, dtype=complex)
    converged = False
    for it in range(1, max_iter + 1):
        q = np.real(np.sum(Y.conj() * hermitian_solve(sigma, Y), axis=0))
        new = (dim / N) * (Y / q) @ Y.conj().T
        new = hermitian(new) * dim / np.real(np.trace(new))
        change = np.linalg.norm(new - sigma) / np.linalg.norm(sigma)
        sigma = new
        if change < tol:
            converged = True
            break
    if not converged:
        logging.warning(f'Tyler iteration stopped at max_iter={max_iter} without converging')
    return CovEstimate(sigma, domain, 'tyler', N, {'converged': converged, 'iterations': it})


def sirv_estimate(snapshots, tol=1e-8, max_iter=200):
    """Two-step compound-Gaussian estimate: Tyler shape, then the mean texture

    The per-snapshot texture is y^H Sigma^-1 y / dim and R = mean(texture) Sigma.
    """
    shape = tyler_shape(snapshots, tol, max_iter)
    Y = np.asarray(snapshots)
    texture = np.real(np.sum(Y.conj() * hermitian_solve(shape.R, Y), axis=0)) / shape.dim
    kappa = float(np.mean(texture))
    meta = dict(shape.metadata, mean_texture=kappa)
    return CovEstimate(kappa * shape.R, shape.domain, 'sirv', shape.support, meta)
