import logging
import re
from dataclasses import dataclass

import numpy as np


def psk_constellation(omega):
    """Unit-modulus Omega-PSK points exp(j 2 pi m / Omega)"""
    if int(omega) < 2:
        raise ValueError(f'PSK order must be >= 2, got {omega}')
    return np.exp(2j * np.pi * np.arange(int(omega)) / int(omega))


def qam_constellation(M):
    """Square M-QAM scaled to exact unit average power"""
    side = int(round(np.sqrt(M)))
    if side * side != M or side < 2 or side & (side - 1):
        raise ValueError(f'QAM order must be a square power of two >= 4, got {M}')
    levels = np.arange(-(side - 1), side, 2)
    pts = (levels[:, None] + 1j * levels[None, :]).ravel()
    return pts / np.sqrt(np.mean(np.abs(pts) ** 2))


def constellation(modulation):
    """Constellation points of 'bpsk', 'qpsk', 'pskN' or 'qamM'

    Returns
    -------
    points : numpy.ndarray
    omega : int or None
        PSK order, None for QAM.

    """
    m = modulation.lower()
    if m == 'bpsk':
        return psk_constellation(2), 2
    if m == 'qpsk':
        return psk_constellation(4), 4
    match = re.fullmatch(r'(psk|qam)(\d+)', m)
    if match is None:
        raise ValueError(f'unsupported modulation: {modulation}')
    order = int(match.group(2))
    if match.group(1) == 'psk':
        return psk_constellation(order), order
    return qam_constellation(order), None


@dataclass
class SymbolGrid:
    """Stream symbols s_n[l], array of shape (N, L, N_s); the first K are communication streams"""

    s: np.ndarray
    K: int
    modulation: str

    @property
    def N_s(self):
        return self.s.shape[-1]

    @property
    def comm(self):
        return self.s[..., :self.K]

    @property
    def radar(self):
        return self.s[..., self.K:]

    @property
    def omega(self):
        return constellation(self.modulation)[1]


def resource_mask(grid, spacing=4, offset=0, axis='subcarrier'):
    """Comb of (n, l) resources reserved for sensing streams

    Returns
    -------
    numpy.ndarray
        Boolean array of shape (N, L), True on every `spacing`-th subcarrier
        (or symbol) starting at `offset`.

    """
    if int(spacing) < 1:
        raise ValueError(f'spacing must be >= 1, got {spacing}')
    mask = np.zeros((grid.N, grid.L), dtype=bool)
    if axis == 'subcarrier':
        mask[offset::spacing, :] = True
    elif axis == 'symbol':
        mask[:, offset::spacing] = True
    else:
        raise ValueError('axis must be "subcarrier" or "symbol"')
    return mask


def generate_symbol_grid(grid, K, N_s, modulation, rng, probe=False, mask=None):
    """Draw i.i.d. unit-power constellation symbols for every stream

    Parameters
    ----------
    grid : OfdmGrid
    K : int
        Communication streams.
    N_s : int
        Total streams (K communication plus N_s - K sensing).
    modulation : str
        'bpsk', 'qpsk', 'pskN' or 'qamM'.
    rng : numpy.random.Generator
    probe : bool, optional
        Constant unit symbols on the sensing streams instead of random data.
    mask : numpy.ndarray, optional
        (N, L) sensing resources. Sensing streams are zero elsewhere and
        communication streams are zero on them.

    Returns
    -------
    SymbolGrid

    """
    if not 0 <= K <= N_s or N_s < 1:
        raise ValueError(f'need 0 <= K <= N_s and N_s >= 1, got K={K}, N_s={N_s}')
    points, _ = constellation(modulation)
    idx = rng.integers(0, len(points), (grid.N, grid.L, N_s))
    s = points[idx]
    if probe and N_s > K:
        logging.debug(f'Deterministic probe symbols on {N_s - K} sensing streams')
        s[..., K:] = 1.0
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (grid.N, grid.L):
            raise ValueError(f'resource mask must have shape {(grid.N, grid.L)}')
        s[..., K:] *= mask[..., None]
        s[..., :K] *= ~mask[..., None]
    return SymbolGrid(s, K, modulation)
