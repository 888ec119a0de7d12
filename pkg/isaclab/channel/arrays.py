from dataclasses import dataclass, field

import numpy as np

from ..constants import Constants

ARRAY_KINDS = ('ula_half_lambda', 'arbitrary')


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Antenna element positions r_i [m], one row per element"""

    positions: np.ndarray
    kind: str = 'arbitrary'
    f0: float = field(default=None)

    def __post_init__(self):
        if self.kind not in ARRAY_KINDS:
            raise ValueError('kind must be "ula_half_lambda" or "arbitrary"')
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.shape[1] != 3:
            raise ValueError(f'element positions must be 3-vectors, got shape {pos.shape}')
        if not np.all(np.isfinite(pos)):
            raise ValueError('element positions must be finite')
        object.__setattr__(self, 'positions', pos)
        if self.kind == 'ula_half_lambda' and self.f0 is None:
            raise ValueError('a half-wavelength ULA needs its design frequency f0')

    @classmethod
    def ula(cls, count, f0):
        """Half-wavelength uniform linear array along the x axis"""
        if int(count) < 1:
            raise ValueError(f'array needs at least one element, got {count}')
        pos = np.zeros((int(count), 3))
        pos[:, 0] = np.arange(int(count)) * Constants.C0 / f0 / 2.0
        return cls(pos, 'ula_half_lambda', f0)

    @property
    def count(self):
        return self.positions.shape[0]


def _wavevector(theta):
    theta = np.atleast_1d(theta)
    return np.stack([np.sin(theta), np.cos(theta), np.zeros_like(theta)])


def steering_matrix(array, thetas, n, grid):
    """Spatial steering vectors for an angle grid

    Parameters
    ----------
    array : ArrayGeometry
    thetas : float or numpy.ndarray
        Azimuths [rad].
    n : int
        Subcarrier index.
    grid : OfdmGrid

    Returns
    -------
    numpy.ndarray
        Complex array of shape (array.count, len(thetas)).

    Notes
    -----
    ULA: exp(-j pi chi_n i sin(theta)).
    Arbitrary geometry: exp(-j 2 pi / lambda_n k(theta)^T r_i).

    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if array.kind == 'ula_half_lambda':
        i = np.arange(array.count)[:, None]
        return np.exp(-1j * np.pi * grid.chi(n) * i * np.sin(thetas)[None, :])
    lam = grid.wavelength(n) if grid.wideband else grid.wavelength(0)
    return np.exp(-2j * np.pi / lam * (array.positions @ _wavevector(thetas)))


def spatial_steering(array, theta, n, grid):
    return steering_matrix(array, theta, n, grid)[:, 0]


def band_steering(array, theta, grid):
    """Steering vectors of one azimuth on every subcarrier, shape (count, N)"""
    if array.kind == 'ula_half_lambda':
        i = np.arange(array.count)[:, None]
        return np.exp(-1j * np.pi * np.sin(theta) * i * grid.chi(grid.subcarriers)[None, :])
    return np.stack([steering_matrix(array, theta, n, grid)[:, 0] for n in range(grid.N)], axis=1)
