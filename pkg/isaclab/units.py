import math

import numpy as np

from .constants import Constants


def _deg2rad(deg):
    return deg * math.pi / 180.0

def _rad2deg(rad):
    return rad * 180.0 / math.pi

def _db2lin(db):
    return 10.0 ** (db / 10.0)

def _lin2db(lin):
    return 10.0 * np.log10(lin)

def _delay_from_range(r):
    return 2.0 * r / Constants.C0

def _range_from_delay(tau):
    return tau * Constants.C0 / 2.0


def doppler_from_velocity(v, f0):
    """Monostatic two-way Doppler shift

    Parameters
    ----------
    v : float or numpy.ndarray
        Radial velocity [m s-1], positive when closing.
    f0 : float
        Carrier frequency [Hz].

    Returns
    -------
    f_D : float or numpy.ndarray
        Doppler shift [Hz].

    Notes
    -----
    f_D = 2 * v * f0 / c0

    """
    return 2.0 * v * f0 / Constants.C0


def velocity_from_doppler(f_d, f0):
    return f_d * Constants.C0 / (2.0 * f0)
