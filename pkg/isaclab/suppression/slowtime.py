"""Slow-time clutter filters: cancellers, background subtraction and a scalar Kalman tracker"""
import logging
from dataclasses import dataclass, field

import numpy as np

from ..constants import Constants

METHODS = ('sdc', 'symbol_avg', 'rma', 'csd', 'kalman')


@dataclass
class SlowTimeFilter:
    """Filter settings plus the recursive state carried between calls

    sdc : y[l] - y[l - G_d]
    csd : sdc with G_d = 1
    symbol_avg : y[l] minus the CPI mean
    rma : exponential clutter map c[l] = rho c[l-1] + (1 - rho) y[l]
    kalman : AR(1) clutter c[l] = a_c c[l-1] + e[l] tracked per cell,
        process variance q and measurement variance r
    """

    method: str = 'rma'
    G_d: int = 1
    rho: float = Constants.RMA_RHO
    a_c: float = Constants.KALMAN_AC
    q: float = None
    r: float = None
    state: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError('method must be "sdc", "symbol_avg", "rma", "csd" or "kalman"')
        if self.method == 'csd':
            self.G_d = 1
        if int(self.G_d) != self.G_d or self.G_d < 1:
            raise ValueError(f'G_d must be an integer >= 1, got {self.G_d}')
        if not 0 < self.rho < 1:
            raise ValueError(f'rho must lie in (0, 1), got {self.rho}')
        if self.q is not None and self.q < 0 or self.r is not None and self.r <= 0:
            raise ValueError('Kalman variances must be q >= 0 and r > 0')

    def reset(self):
        self.state = {}


@dataclass
class FilteredSeries:
    """Residual y - y_c along the last axis, with the leading invalid samples flagged"""

    residual: np.ndarray
    background: np.ndarray
    valid: np.ndarray
    method: str

    def trimmed(self):
        """Residual with invalid samples dropped"""
        return self.residual[..., self.valid]


def _difference(y, G_d):
    if y.shape[-1] < G_d + 1:
        raise ValueError(f'differencing with G_d={G_d} needs at least {G_d + 1} symbols, '
                         f'got {y.shape[-1]}')
    background = np.zeros_like(y)
    background[..., G_d:] = y[..., :-G_d]
    valid = np.arange(y.shape[-1]) >= G_d
    residual = np.where(valid, y - background, 0.0)
    return residual, background, valid


def _rma(y, rho, state):
    background = np.empty_like(y)
    c = state.get('clutter_map', y[..., 0])
    for l in range(y.shape[-1]):
        c = rho * c + (1.0 - rho) * y[..., l]
        background[..., l] = c
    state['clutter_map'] = c
    return background


def noise_floor(y):
    """Per-cell measurement variance from first differences, E|y[l] - y[l-1]|^2 / 2"""
    if y.shape[-1] < 2:
        return np.mean(np.abs(y) ** 2, axis=-1)
    return 0.5 * np.mean(np.abs(np.diff(y, axis=-1)) ** 2, axis=-1)


def _kalman(y, filt):
    state = filt.state
    a = filt.a_c
    r = noise_floor(y) if filt.r is None else np.broadcast_to(filt.r, y.shape[:-1])
    r = np.maximum(r, np.finfo(float).tiny)
    if filt.q is None:
        q = (1.0 - abs(a) ** 2) * np.mean(np.abs(y) ** 2, axis=-1)
    else:
        q = np.broadcast_to(filt.q, y.shape[:-1])
    c = state.get('clutter', y[..., 0])
    P = state.get('variance', r)
    background = np.empty_like(y)
    for l in range(y.shape[-1]):
        c_pred = a * c
        P_pred = abs(a) ** 2 * P + q
        gain = P_pred / (P_pred + r)
        c = c_pred + gain * (y[..., l] - c_pred)
        P = (1.0 - gain) * P_pred
        background[..., l] = c
    state['clutter'], state['variance'] = c, P
    logging.debug(f'Kalman clutter tracker ended with mean gain {np.mean(gain):.3g}')
    return background


def slow_time_filter(series, filt):
    """Suppress slow-time clutter cell by cell

    Parameters
    ----------
    series : numpy.ndarray
        Any array with slow time on the last axis, e.g. a gated grid
        (P, N, L), a cube (N_r, N, L) or a single cell (L,).
    filt : SlowTimeFilter or str
        Settings; a method name uses the defaults.

    Returns
    -------
    FilteredSeries

    """
    if isinstance(filt, str):
        filt = SlowTimeFilter(filt)
    y = np.asarray(series, dtype=complex)
    all_valid = np.ones(y.shape[-1], dtype=bool)
    if filt.method in ('sdc', 'csd'):
        residual, background, valid = _difference(y, int(filt.G_d))
        return FilteredSeries(residual, background, valid, filt.method)
    if filt.method == 'symbol_avg':
        background = np.broadcast_to(y.mean(axis=-1, keepdims=True), y.shape).copy()
    elif filt.method == 'rma':
        background = _rma(y, filt.rho, filt.state)
    else:
        background = _kalman(y, filt)
    return FilteredSeries(y - background, background, all_valid, filt.method)


@dataclass
class MtiResponse:
    magnitude: np.ndarray
    blind_dopplers: np.ndarray


def mti_response(f_D, G_d, T_sym, f_max=None):
    """|1 - exp(-j 2 pi f_D G_d T_sym)| and the blind Dopplers m / (G_d T_sym) with |f| <= f_max

    f_max defaults to the edge of the unambiguous interval, 1 / (2 T_sym).
    """
    f_D = np.asarray(f_D, dtype=float)
    magnitude = np.abs(1.0 - np.exp(-2j * np.pi * f_D * G_d * T_sym))
    f_max = 0.5 / T_sym if f_max is None else f_max
    step = 1.0 / (G_d * T_sym)
    top = np.floor(f_max / step + 1e-9)
    m = np.arange(-top, top + 1)
    return MtiResponse(magnitude, m * step)


def rma_response(f_D, rho, T_sym):
    """Steady-state residual gain |1 - (1 - rho) / (1 - rho exp(-j 2 pi f_D T_sym))|"""
    z = np.exp(-2j * np.pi * np.asarray(f_D, dtype=float) * T_sym)
    return np.abs(1.0 - (1.0 - rho) / (1.0 - rho * z))
