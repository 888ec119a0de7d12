import math
from dataclasses import dataclass

import numpy as np

from ..constants import Constants


@dataclass(frozen=True)
class GitParams:
    """Terrain constants of the empirical GIT land-clutter model

    Defaults describe soil, sand and rocks.
    """

    A: float = 0.25
    B: float = 0.83
    C: float = 0.0013
    D: float = 2.3


def git_reflectivity(lam, phi_dep, sigma_h, terrain=GitParams()):
    """Clutter reflectivity from the GIT land-clutter model

    Parameters
    ----------
    lam : float or numpy.ndarray
        Wavelength [m].
    phi_dep : float
        Depression angle [rad].
    sigma_h : float
        Surface roughness standard deviation [m].
    terrain : GitParams
        Terrain constants A, B, C, D.

    Returns
    -------
    sigma0 : float or numpy.ndarray
        Reflectivity [dB].

    Raises
    ------
    ValueError
        If phi_dep + C or A is not positive.

    Notes
    -----
    sigma0 = 10 * log10(A * (phi_dep + C) ** B * exp(-D * (1 + 0.1 * sigma_h / lam)))

    """
    base = phi_dep + terrain.C
    if not base > 0 or not terrain.A > 0:
        raise ValueError(f'GIT model needs A > 0 and phi_dep + C > 0, got A={terrain.A}, '
                         f'phi_dep + C={base}')
    lam = np.asarray(lam, dtype=float)
    # the log of the exponential is taken analytically
    sigma0 = 10.0 * (math.log10(terrain.A) + terrain.B * math.log10(base)) \
        - 10.0 * terrain.D * (1.0 + 0.1 * sigma_h / lam) / math.log(10.0)
    return sigma0 if sigma0.ndim else float(sigma0)


def _delta_ka(d_dom, bandwidth):
    return 2.0 * math.pi * d_dom * bandwidth / Constants.C0


def _rho_f(delta_f_gap, b_c):
    return np.exp(-np.abs(delta_f_gap) / b_c)


def wideband_indicators(d_dom, bandwidth, b_c, delta_f_gap):
    """Electrical-size change and frequency coherence of a clutter cell

    Parameters
    ----------
    d_dom : float
        Dominant scatterer size [m].
    bandwidth : float
        Signal bandwidth [Hz].
    b_c : float
        Coherence bandwidth [Hz].
    delta_f_gap : float or numpy.ndarray
        Frequency separation [Hz].

    Returns
    -------
    dict
        'delta_ka' : 2 pi D_dom B / c0 and 'rho_f' : exp(-|delta_f_gap| / B_c).

    """
    if min(d_dom, bandwidth) < 0:
        raise ValueError('d_dom and bandwidth must be >= 0')
    if not b_c > 0:
        raise ValueError(f'coherence bandwidth must be positive, got {b_c}')
    return {'delta_ka': _delta_ka(d_dom, bandwidth), 'rho_f': _rho_f(delta_f_gap, b_c)}


def frequency_correlation(grid, b_c):
    """N x N subcarrier coherence matrix rho_f((n - n') delta_f)"""
    if not b_c > 0:
        raise ValueError(f'coherence bandwidth must be positive, got {b_c}')
    n = grid.subcarriers
    return _rho_f((n[:, None] - n[None, :]) * grid.delta_f, b_c)


def coherence_subband_width(grid, b_c):
    """Largest subband size N_sb (>= 1) with N_sb * delta_f <= B_c"""
    return int(min(grid.N, max(1, math.floor(b_c / grid.delta_f))))


def subcarrier_power_profile(grid, power, freq_model=None):
    """Per-subcarrier clutter power sigma^2_{c,n}

    Frequency-flat when no frequency model is given. Otherwise the GIT
    reflectivity colors the power relative to the lowest subcarrier,
    sigma^2_{c,n} = power * xi_c * sigma0(lambda_n) / sigma0(lambda_0).

    """
    if freq_model is None:
        return np.full(grid.N, float(power))
    sigma0_db = git_reflectivity(grid.wavelength(grid.subcarriers), freq_model.phi_dep,
                                 freq_model.sigma_h, freq_model.terrain)
    ratio = 10.0 ** ((sigma0_db - sigma0_db[0]) / 10.0)
    return power * freq_model.xi_c * ratio
