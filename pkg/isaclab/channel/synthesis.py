import logging
from dataclasses import dataclass, field

import numpy as np

from ..scene.amplitude import mean_power, sample_clutter_gain, sample_sirv
from ..waveform.symbols import psk_constellation
from .arrays import band_steering
from .steering import _delay_vector, _doppler_vector

COMPONENTS = ('target', 'cold', 'hot', 'noise')


@dataclass
class DataCube:
    """Received tensor y[i, n, l] over receive element, subcarrier and symbol

    `components` holds the per-source contributions when synthesis was asked
    to keep them, and `metadata` carries the symbols of cooperative emitters.
    """

    y: np.ndarray
    grid: object
    seed: int = None
    scene_digest: str = ''
    components: dict = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=complex)
        if self.y.ndim != 3:
            raise ValueError(f'cube must have shape (N_r, N, L), got {self.y.shape}')
        if not np.all(np.isfinite(self.y)):
            raise ValueError('cube entries must be finite')

    @property
    def N_r(self):
        return self.y.shape[0]

    @property
    def N(self):
        return self.y.shape[1]

    @property
    def L(self):
        return self.y.shape[2]

    def snapshot(self, n):
        """Per-subcarrier stacked vector y_n of length N_r L"""
        return self.y[:, n, :].reshape(-1, order='F')


def stack_snapshots(cube, mode='per_subcarrier'):
    """Stack a cube into space-time snapshot vectors

    Parameters
    ----------
    cube : DataCube or numpy.ndarray
        Tensor of shape (N_r, N, L).
    mode : {'per_subcarrier', 'full_band'}

    Returns
    -------
    numpy.ndarray
        (N, N_r L) with row n = y_n (entry i + N_r l), or the full-band
        vector of length N N_r L stacking y_0, ..., y_{N-1}.

    """
    y = getattr(cube, 'y', cube)
    N_r, N, L = y.shape
    per_n = np.transpose(y, (1, 2, 0)).reshape(N, L * N_r)
    if mode == 'per_subcarrier':
        return per_n
    elif mode == 'full_band':
        return per_n.reshape(-1)
    raise ValueError('mode must be "per_subcarrier" or "full_band"')


def unstack_snapshots(snapshots, N_r, L):
    """Inverse of stack_snapshots for either mode"""
    per_n = np.asarray(snapshots).reshape(-1, L, N_r)
    return np.transpose(per_n, (2, 0, 1))


def _scatterer_gains(s, scene, rng):
    grid = scene.grid
    shape = (grid.N, grid.L) if scene.fading == 'per_symbol' else (grid.N, 1)
    if s.gain is not None:
        return np.full(shape, s.gain, dtype=complex)
    n_draws = shape[1]
    g = sample_clutter_gain(s.amplitude, rng, n_draws)
    norm = mean_power(s.amplitude)
    g = g / np.sqrt(norm) if norm > 0 else np.zeros_like(g)
    if scene.freq_model is not None and s.role == 'cold_clutter':
        # frequency-coloured gains: unit-variance Gaussian process across subcarriers
        root = np.linalg.cholesky(scene.freq_model.correlation(grid) + 1e-12 * np.eye(grid.N))
        w = (rng.standard_normal((grid.N, n_draws)) + 1j * rng.standard_normal((grid.N, n_draws)))
        gp = root @ w / np.sqrt(2)
        return np.sqrt(s.profile)[:, None] * np.abs(g)[None, :] * gp
    return np.sqrt(s.profile)[:, None] * g[None, :]


def _echo(s, gains, scene, tx):
    grid = scene.grid
    a = band_steering(scene.tx_array, s.theta_tx, grid)
    b = band_steering(scene.rx_array, s.theta, grid)
    ax = np.einsum('tn,nlt->nl', a.conj(), tx.x)
    phase = _delay_vector(s.tau, grid)[:, None] * _doppler_vector(s.f_D, grid)[None, :]
    return b[:, :, None] * (gains * phase * ax)[None, :, :]


def _noise(scene, rng):
    grid, N_r = scene.grid, scene.N_r
    noise = scene.noise
    shape = (N_r, grid.N, grid.L)
    if noise.kind == 'white':
        return np.sqrt(noise.sigma2 / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    if noise.kind == 'sirv':
        z = sample_sirv(noise.amplitude, grid.N * grid.L, rng)
        return np.sqrt(noise.sigma2) * z.reshape(shape)
    w = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    z = np.empty(shape, dtype=complex)
    for n in range(grid.N):
        evals, evecs = np.linalg.eigh(noise.covariance(n, N_r))
        z[:, n, :] = (evecs * np.sqrt(np.maximum(evals, 0.0))) @ w[:, n, :]
    return z


def emitter_symbols(scene, rng):
    """Unit-power QPSK symbols s_g[n, l] of every external emitter, shape (G, N, L)"""
    points = psk_constellation(4)
    return points[rng.integers(0, 4, (scene.n_emitters, scene.grid.N, scene.grid.L))]


def synthesize_cube(scene, tx, rng=None, keep_components=False):
    """Received data cube of a scene under a transmitted waveform

    Parameters
    ----------
    scene : Scene
    tx : TransmitRecord
        Must share the scene's grid (N, L) and transmit array size.
    rng : numpy.random.Generator, optional
        Defaults to stream 1 of the scene seed.
    keep_components : bool, optional
        Keep target, cold-clutter, hot-clutter and noise contributions.

    Returns
    -------
    DataCube

    Raises
    ------
    ValueError
        If the waveform does not match the scene grid.

    """
    grid = scene.grid
    if tx.x.shape != (grid.N, grid.L, scene.N_t):
        raise ValueError(f'transmit record {tx.x.shape} does not match the scene grid '
                         f'{(grid.N, grid.L, scene.N_t)}')
    rng = scene.rng(1) if rng is None else rng
    shape = (scene.N_r, grid.N, grid.L)
    parts = {c: np.zeros(shape, dtype=complex) for c in COMPONENTS}

    if scene.mute_transmitter:
        logging.debug('Transmitter muted, skipping waveform-coherent returns')
    else:
        for s in scene.scatterers:
            gains = _scatterer_gains(s, scene, rng)
            parts['target' if s.role == 'target' else 'cold'] += _echo(s, gains, scene, tx)

    metadata = {}
    if scene.hot_paths:
        symbols = emitter_symbols(scene, rng)
        for g in scene.hot_paths:
            mu = np.sqrt(g.power / 2) * (rng.standard_normal() + 1j * rng.standard_normal())
            b = band_steering(scene.rx_array, g.theta, grid)
            phase = _delay_vector(g.tau, grid)[:, None] * _doppler_vector(g.f_D, grid)[None, :]
            parts['hot'] += mu * b[:, :, None] * (phase * symbols[g.emitter_id])[None, :, :]
        cooperative = sorted({g.emitter_id for g in scene.hot_paths if g.cooperative})
        if cooperative:
            metadata['emitter_symbols'] = {e: symbols[e] for e in cooperative}

    parts['noise'] = _noise(scene, rng)
    y = parts['target'] + parts['cold'] + parts['hot'] + parts['noise']
    logging.debug(f'Synthesised cube {y.shape} for scene {scene.digest()}')
    return DataCube(y, grid, scene.seed, scene.digest(),
                    parts if keep_components else None, metadata)
