import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from sklearn.cluster import DBSCAN

from ..constants import Constants
from ..channel.steering import temporal_steering

METHODS = ('glrt_fixed', 'ca_cfar')


@dataclass(frozen=True)
class Detection:
    n_d: int
    n_v: int
    statistic: float
    threshold: float


@dataclass
class DetectionReport:
    detections: list = field(default_factory=list)
    method: str = 'ca_cfar'
    p_fa: float = None

    def __len__(self):
        return len(self.detections)

    def to_frame(self):
        """Frame with columns range_bin, doppler_bin, statistic, threshold"""
        return pd.DataFrame([(d.n_d, d.n_v, d.statistic, d.threshold) for d in self.detections],
                            columns=['range_bin', 'doppler_bin', 'statistic', 'threshold'])


def _glrt_ratio(power, total):
    rest = total - power
    stat = np.zeros(power.shape)
    if total <= 0:
        return stat
    ok = rest > 1e-12 * total
    stat[ok] = power[ok] / rest[ok]
    stat[~ok & (power > 0)] = np.inf
    return stat


def glrt(chi):
    """|chi|^2 / (||chi||_F^2 - |chi|^2), saturating to inf when one cell holds all energy"""
    power = np.abs(getattr(chi, 'chi', chi)) ** 2
    return _glrt_ratio(power, power.sum())


def glrt_direct(H, grid):
    """GLRT evaluated with explicit delay and Doppler steering correlations

    For every on-grid cell the unit-norm steering u = t(tau_k) kron d(f_m) / sqrt(NL)
    is correlated with H, giving |u^H h|^2 / (||h||^2 - |u^H h|^2).
    """
    H = np.asarray(H)
    N, L = H.shape
    T = np.stack([temporal_steering('delay', k / (N * grid.delta_f), grid) for k in range(N)], axis=1)
    D = np.stack([temporal_steering('doppler', m / (L * grid.T_sym), grid) for m in range(L)], axis=1)
    corr = T.conj().T @ H @ D.conj() / np.sqrt(N * L)
    return _glrt_ratio(np.abs(corr) ** 2, np.sum(np.abs(H) ** 2))


def _training_sum(power, guard, train):
    total = np.zeros_like(power)
    for axis in (0, 1):
        for k in range(guard + 1, guard + train + 1):
            total += np.roll(power, k, axis=axis) + np.roll(power, -k, axis=axis)
    return total


def cfar_alpha(p_fa, n_train):
    """CA-CFAR scale alpha = N_train (P_fa^(-1/N_train) - 1)"""
    return n_train * (p_fa ** (-1.0 / n_train) - 1.0)


def ca_cfar(power, p_fa=1e-3, guard=Constants.CFAR_GUARD, train=Constants.CFAR_TRAIN):
    """Cross-window cell-averaging CFAR with toroidal wrap

    Parameters
    ----------
    power : numpy.ndarray
        Square-law map (N, L).
    p_fa : float
        Target probability of false alarm.
    guard, train : int
        Guard and training cells per side in each dimension.

    Returns
    -------
    threshold : numpy.ndarray
        Per-cell threshold alpha * (local training mean).

    """
    span = 2 * (guard + train) + 1
    if span > min(power.shape):
        raise ValueError(f'CFAR window of {span} cells does not fit a {power.shape} map')
    if not 0 < p_fa < 1:
        raise ValueError(f'p_fa must lie in (0, 1), got {p_fa}')
    n_train = 4 * train
    return cfar_alpha(p_fa, n_train) * _training_sum(power, guard, train) / n_train


def detect(map_or_H, method='ca_cfar', zeta=None, p_fa=1e-3, guard=Constants.CFAR_GUARD,
           train=Constants.CFAR_TRAIN):
    """Detect targets on a range-Doppler map

    Parameters
    ----------
    map_or_H : RangeDopplerMap or numpy.ndarray
        Map chi (complex) on which detection runs.
    method : {'glrt_fixed', 'ca_cfar'}
    zeta : float
        Fixed GLRT threshold, required for 'glrt_fixed'.

    Returns
    -------
    DetectionReport
        Detections sorted by (n_d, n_v).

    """
    chi = np.asarray(getattr(map_or_H, 'chi', map_or_H))
    if method == 'glrt_fixed':
        if zeta is None:
            raise ValueError('glrt_fixed needs a threshold zeta')
        stat = glrt(chi)
        threshold = np.full(stat.shape, float(zeta))
        report_p_fa = None
    elif method == 'ca_cfar':
        stat = np.abs(chi) ** 2
        threshold = ca_cfar(stat, p_fa, guard, train)
        report_p_fa = p_fa
    else:
        raise ValueError('method must be "glrt_fixed" or "ca_cfar"')
    hits = np.argwhere(stat > threshold)
    detections = [Detection(int(k), int(m), float(stat[k, m]), float(threshold[k, m]))
                  for k, m in hits]
    logging.debug(f'{method}: {len(detections)} detections')
    return DetectionReport(detections, method, report_p_fa)


def cluster_detections(report, eps=1.5, min_samples=1):
    """Group adjacent detections into objects with DBSCAN

    Returns
    -------
    list of Detection
        The strongest cell of every cluster, sorted by (n_d, n_v).

    """
    if not report.detections:
        return []
    cells = np.array([(d.n_d, d.n_v) for d in report.detections])
    labels = DBSCAN(eps=eps, min_samples=min_samples).fit_predict(cells)
    peaks = []
    for label in sorted(set(labels)):
        members = [d for d, l in zip(report.detections, labels) if l == label]
        peaks.append(max(members, key=lambda d: d.statistic))
    return sorted(peaks, key=lambda d: (d.n_d, d.n_v))
