"""Clutter amplitude laws: Rayleigh, log-normal, Weibull, K and compound-Gaussian"""
from dataclasses import dataclass, field

import numpy as np
from scipy import special

KINDS = ('gaussian', 'rayleigh', 'lognormal', 'weibull', 'k_dist', 'sirv')
TEXTURES = ('gamma', 'inverse_gamma', 'constant')

_REQUIRED = {
    'gaussian': ('power',),
    'rayleigh': ('sigma_r',),
    'lognormal': ('mu', 'sigma'),
    'weibull': ('k', 'lam'),
    'k_dist': ('nu', 'b'),
    'sirv': ('texture', 'shape'),
}


@dataclass
class AmplitudeModel:
    """Amplitude law of a scatterer gain or of a compound-Gaussian snapshot

    Parameters per kind
    -------------------
    gaussian : power (sigma^2 of CN(0, sigma^2))
    rayleigh : sigma_r (E{r^2} = 2 sigma_r^2)
    lognormal : mu, sigma of ln r
    weibull : k (shape), lam (scale)
    k_dist : nu (shape), b (scale b_K)
    sirv : texture in {'gamma', 'inverse_gamma', 'constant'}, nu (texture shape),
        shape (N_r x N_r Hermitian shape matrix, normalised to trace N_r)

    """

    kind: str = 'gaussian'
    params: dict = field(default_factory=lambda: {'power': 1.0})

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f'unsupported amplitude kind: {self.kind}')
        missing = [p for p in _REQUIRED[self.kind] if p not in self.params]
        if missing:
            raise ValueError(f'{self.kind} amplitude model needs {", ".join(missing)}')
        if self.kind == 'gaussian':
            if self.params['power'] < 0:
                raise ValueError('gaussian power must be >= 0')
        elif self.kind == 'sirv':
            self._check_sirv()
        else:
            for name in _REQUIRED[self.kind]:
                if name == 'mu':
                    continue
                if not self.params[name] > 0:
                    raise ValueError(f'{self.kind} parameter {name} must be strictly positive')

    def _check_sirv(self):
        texture = self.params['texture']
        if texture not in TEXTURES:
            raise ValueError('texture must be "gamma", "inverse_gamma" or "constant"')
        if texture != 'constant' and not self.params.get('nu', 0) > 0:
            raise ValueError('sirv texture shape nu must be strictly positive')
        if texture == 'inverse_gamma' and not self.params['nu'] > 1:
            raise ValueError('inverse_gamma texture needs nu > 1 for a unit mean')
        shape = np.atleast_2d(np.asarray(self.params['shape'], dtype=complex))
        if shape.shape[0] != shape.shape[1]:
            raise ValueError('sirv shape matrix must be square')
        trace = np.real(np.trace(shape))
        if not trace > 0:
            raise ValueError('sirv shape matrix must have a positive trace')
        self.params['shape'] = shape * shape.shape[0] / trace

    @property
    def dim(self):
        return self.params['shape'].shape[0] if self.kind == 'sirv' else 1


def mean_power(model):
    """Closed-form E{|g|^2} of the amplitude law"""
    p = model.params
    if model.kind == 'gaussian':
        return float(p['power'])
    if model.kind == 'rayleigh':
        return 2.0 * p['sigma_r'] ** 2
    if model.kind == 'lognormal':
        return float(np.exp(2.0 * p['mu'] + 2.0 * p['sigma'] ** 2))
    if model.kind == 'weibull':
        return p['lam'] ** 2 * special.gamma(1.0 + 2.0 / p['k'])
    if model.kind == 'k_dist':
        return 4.0 * p['nu'] / p['b'] ** 2
    # unit-mean texture times tr(shape)/N_r = 1
    return 1.0


def _uniform_phase(rng, size):
    return np.exp(2j * np.pi * rng.random(size))


def _texture(model, rng, size):
    texture = model.params['texture']
    if texture == 'constant':
        return np.ones(size)
    nu = model.params['nu']
    if texture == 'gamma':
        return rng.gamma(nu, 1.0 / nu, size)
    return (nu - 1.0) / rng.gamma(nu, 1.0, size)


def sample_sirv(model, size, rng):
    """Compound-Gaussian snapshots sqrt(kappa) g with g ~ CN(0, shape)

    Returns
    -------
    numpy.ndarray
        Complex array of shape (N_r, size).

    """
    if model.kind != 'sirv':
        raise ValueError(f'sample_sirv needs a sirv model, got {model.kind}')
    shape = model.params['shape']
    dim = shape.shape[0]
    w = (rng.standard_normal((dim, size)) + 1j * rng.standard_normal((dim, size))) / np.sqrt(2)
    evals, evecs = np.linalg.eigh(0.5 * (shape + shape.conj().T))
    root = evecs * np.sqrt(np.maximum(evals, 0.0))
    kappa = _texture(model, rng, size)
    return (root @ w) * np.sqrt(kappa)[None, :]


def sample_clutter_gain(model, rng, size=None):
    """Draw complex clutter gains

    Parameters
    ----------
    model : AmplitudeModel
    rng : numpy.random.Generator
    size : int or tuple, optional
        Number of independent draws (the default is a single draw).

    Returns
    -------
    complex or numpy.ndarray
        Gains with the selected magnitude law and uniform phase on [0, 2 pi).
        The sirv kind returns snapshot vector(s) of length N_r instead.

    Raises
    ------
    ValueError
        If the amplitude kind is unsupported.

    """
    p = model.params
    n = 1 if size is None else size
    if model.kind == 'gaussian':
        g = np.sqrt(p['power'] / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        return g[0] if size is None else g
    if model.kind == 'sirv':
        g = sample_sirv(model, int(np.prod(n)), rng)
        return g[:, 0] if size is None else g
    if model.kind == 'rayleigh':
        r = rng.rayleigh(p['sigma_r'], n)
    elif model.kind == 'lognormal':
        r = rng.lognormal(p['mu'], p['sigma'], n)
    elif model.kind == 'weibull':
        r = p['lam'] * rng.weibull(p['k'], n)
    elif model.kind == 'k_dist':
        # gamma texture with scale 4/b^2 modulating Rayleigh speckle
        tau = rng.gamma(p['nu'], 4.0 / p['b'] ** 2, n)
        r = np.sqrt(tau * rng.exponential(1.0, n))
    else:
        raise ValueError(f'unsupported amplitude kind: {model.kind}')
    g = r * _uniform_phase(rng, n)
    return g[0] if size is None else g
