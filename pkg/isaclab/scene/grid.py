import logging
from dataclasses import dataclass, field

import numpy as np

from ..constants import Constants


@dataclass(frozen=True)
class OfdmGrid:
    """Time-frequency lattice of one coherent processing interval

    Parameters
    ----------
    f0 : float
        Carrier frequency [Hz].
    delta_f : float
        Subcarrier spacing [Hz].
    N : int
        Number of subcarriers.
    L : int
        OFDM symbols per CPI.
    T_cp : float, optional
        Cyclic prefix duration [s]. Defaults to 1/(14 delta_f).

    Raises
    ------
    ValueError
        If N < 1, L < 1, delta_f <= 0 or T_cp < 0.

    """

    f0: float
    delta_f: float
    N: int
    L: int
    T_cp: float = None
    wideband: bool = field(default=True, compare=False)

    def __post_init__(self):
        if int(self.N) < 1 or int(self.L) < 1:
            raise ValueError(f'N and L must be >= 1, got N={self.N}, L={self.L}')
        if not self.delta_f > 0:
            raise ValueError(f'delta_f must be positive, got {self.delta_f}')
        if not self.f0 > 0:
            raise ValueError(f'f0 must be positive, got {self.f0}')
        if self.T_cp is None:
            logging.debug('T_cp was not set, default to 1/(14*delta_f)')
            object.__setattr__(self, 'T_cp', 1.0 / (Constants.CP_FACTOR * self.delta_f))
        elif self.T_cp < 0:
            raise ValueError(f'T_cp must be >= 0, got {self.T_cp}')
        object.__setattr__(self, 'N', int(self.N))
        object.__setattr__(self, 'L', int(self.L))

    @property
    def T_sym(self):
        return 1.0 / self.delta_f + self.T_cp

    @property
    def bandwidth(self):
        return self.N * self.delta_f

    @property
    def subcarriers(self):
        return np.arange(self.N)

    def frequency(self, n):
        return self.f0 + np.asarray(n) * self.delta_f

    def wavelength(self, n):
        return Constants.C0 / self.frequency(n)

    def chi(self, n):
        """Beam-squint factor 1 + n delta_f / f0 (unity when wideband is off)"""
        if not self.wideband:
            return np.ones_like(np.asarray(n, dtype=float))
        return 1.0 + np.asarray(n) * self.delta_f / self.f0

    @property
    def range_resolution(self):
        return Constants.C0 / (2.0 * self.bandwidth)

    @property
    def doppler_resolution(self):
        return 1.0 / (self.L * self.T_sym)

    def narrowband(self):
        return OfdmGrid(self.f0, self.delta_f, self.N, self.L, self.T_cp, wideband=False)
