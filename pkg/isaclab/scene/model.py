import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from ..channel.arrays import ArrayGeometry
from ..constants import Constants
from ..errors import ConfigError
from ..units import _db2lin, _deg2rad, _delay_from_range, doppler_from_velocity
from ..utils.linalg import is_hermitian
from .amplitude import AmplitudeModel
from .calcs import GitParams, _delta_ka, frequency_correlation, subcarrier_power_profile
from .grid import OfdmGrid

ROLES = ('target', 'cold_clutter')
NOISE_KINDS = ('white', 'colored', 'sirv')
FADING = ('block', 'per_symbol')


@dataclass
class Scatterer:
    """Point scatterer of the system's own waveform (target or cold clutter)

    Attributes
    ----------
    theta : float
        Receive azimuth [rad].
    tau : float
        Round-trip delay [s].
    f_D : float
        Doppler shift [Hz].
    power : float
        Mean reflected power per subcarrier (linear).
    amplitude : AmplitudeModel
        Magnitude law of the complex gain. Drawn gains are normalised to `power`.
    gain : complex, optional
        Fixed gain overriding the random draw.
    theta_tx : float, optional
        Transmit azimuth for bistatic geometries (defaults to theta).
    profile : numpy.ndarray
        Per-subcarrier power sigma^2_n, populated by the Scene.

    """

    role: str
    theta: float
    tau: float
    f_D: float
    power: float = 1.0
    amplitude: AmplitudeModel = field(default_factory=AmplitudeModel)
    gain: complex = None
    theta_tx: float = None
    name: str = ''
    profile: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError('role must be "target" or "cold_clutter"')
        if self.power < 0:
            raise ValueError(f'scatterer power must be >= 0, got {self.power}')
        if self.amplitude.kind == 'sirv':
            raise ValueError('sirv amplitudes describe vector disturbance, not scalar gains')
        if self.theta_tx is None:
            self.theta_tx = self.theta


@dataclass
class HotPath:
    """Path from an external emitter: LoS (direct) or scattered"""

    theta: float
    tau: float
    f_D: float
    power: float
    emitter_id: int = 0
    cooperative: bool = False

    def __post_init__(self):
        if self.power < 0:
            raise ValueError(f'hot-path power must be >= 0, got {self.power}')
        if int(self.emitter_id) < 0:
            raise ValueError('emitter_id must be >= 0')


@dataclass
class FrequencyModel:
    """Wideband clutter statistics: GIT coloring and coherence bandwidth"""

    B_c: float
    phi_dep: float = 0.1
    sigma_h: float = 0.0
    xi_c: float = 1.0
    D_dom: float = 1.0
    terrain: GitParams = field(default_factory=GitParams)

    def __post_init__(self):
        if not self.B_c > 0:
            raise ValueError(f'coherence bandwidth must be positive, got {self.B_c}')
        if self.sigma_h < 0 or self.D_dom < 0 or self.xi_c < 0:
            raise ValueError('sigma_h, D_dom and xi_c must be >= 0')

    def delta_ka(self, grid):
        return _delta_ka(self.D_dom, grid.bandwidth)

    def correlation(self, grid):
        return frequency_correlation(grid, self.B_c)


@dataclass
class NoiseSpec:
    """Disturbance model z_n[l]

    kind 'white' is sigma2 * I, 'colored' takes an explicit Hermitian R
    (one N_r x N_r matrix or one per subcarrier) and 'sirv' draws
    compound-Gaussian snapshots with covariance sigma2 * shape.
    """

    kind: str = 'white'
    sigma2: float = 1.0
    R: np.ndarray = None
    amplitude: AmplitudeModel = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError('noise kind must be "white", "colored" or "sirv"')
        if self.sigma2 < 0:
            raise ValueError(f'noise power must be >= 0, got {self.sigma2}')
        if self.kind == 'colored':
            if self.R is None:
                raise ValueError('colored noise needs an explicit covariance R')
            R = np.asarray(self.R, dtype=complex)
            for Rn in R.reshape((-1,) + R.shape[-2:]):
                if not is_hermitian(Rn, 1e-10):
                    raise ValueError('noise covariance must be Hermitian')
                if np.linalg.eigvalsh(0.5 * (Rn + Rn.conj().T))[0] < -1e-10 * np.abs(np.trace(Rn)):
                    raise ValueError('noise covariance must be positive semidefinite')
            self.R = R
        if self.kind == 'sirv' and (self.amplitude is None or self.amplitude.kind != 'sirv'):
            raise ValueError('sirv noise needs a sirv AmplitudeModel')

    def covariance(self, n, N_r):
        """R_z,n for subcarrier n"""
        if self.kind == 'white':
            return self.sigma2 * np.eye(N_r, dtype=complex)
        if self.kind == 'sirv':
            return self.sigma2 * self.amplitude.params['shape']
        return self.R if self.R.ndim == 2 else self.R[n]

    def power(self, N_r):
        """Average per-element noise power"""
        if self.kind == 'colored':
            R = self.R.reshape((-1, N_r, N_r))
            return float(np.mean(np.real(np.trace(R, axis1=1, axis2=2)))) / N_r
        return float(self.sigma2)


@dataclass
class Scene:
    """Parametric scene: targets, cold clutter, hot paths and disturbance"""

    grid: OfdmGrid
    tx_array: ArrayGeometry
    rx_array: ArrayGeometry
    scatterers: list = field(default_factory=list)
    hot_paths: list = field(default_factory=list)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0
    freq_model: FrequencyModel = None
    fading: str = 'block'
    mute_transmitter: bool = False

    def __post_init__(self):
        if self.fading not in FADING:
            raise ValueError('fading must be "block" or "per_symbol"')
        if self.noise.kind == 'sirv' and self.noise.amplitude.dim != self.N_r:
            raise ValueError('sirv shape matrix must be N_r x N_r')
        if self.noise.kind == 'colored' and self.noise.R.shape[-1] != self.N_r:
            raise ValueError('noise covariance must be N_r x N_r')
        for s in self.scatterers:
            if s.profile is None:
                fm = self.freq_model if s.role == 'cold_clutter' else None
                s.profile = subcarrier_power_profile(self.grid, s.power, fm)

    @property
    def N_t(self):
        return self.tx_array.count

    @property
    def N_r(self):
        return self.rx_array.count

    @property
    def targets(self):
        return [s for s in self.scatterers if s.role == 'target']

    @property
    def clutter(self):
        return [s for s in self.scatterers if s.role == 'cold_clutter']

    @property
    def n_emitters(self):
        return 1 + max((int(g.emitter_id) for g in self.hot_paths), default=-1)

    def rng(self, stream=0):
        """Counter-based generator for one named stream of this scene's seed"""
        return np.random.Generator(np.random.Philox([int(self.seed), int(stream)]))

    def digest(self):
        """Short content hash of the scene parameters"""
        rows = [(s.role, s.theta, s.theta_tx, s.tau, s.f_D, s.power, s.amplitude.kind)
                for s in self.scatterers]
        rows += [(g.theta, g.tau, g.f_D, g.power, g.emitter_id, g.cooperative)
                 for g in self.hot_paths]
        text = json.dumps([dataclasses.astuple(self.grid), self.N_t, self.N_r, rows,
                           self.noise.kind, self.noise.sigma2, self.seed], default=str)
        return hashlib.sha1(text.encode()).hexdigest()[:12]


def clutter_rings(count, center_range, spacing, power, grid, rng, rings=Constants.CLUTTER_RINGS,
                  azimuth_deg=Constants.CLUTTER_AZIMUTH_DEG,
                  velocity=Constants.CLUTTER_VELOCITY, amplitude=None):
    """Cold-clutter scatterers on iso-range rings bracketing a range

    Half of the rings lie on the near-range side and half on the far side,
    spaced `spacing` apart. Scatterers are spread evenly over the rings with
    azimuths and radial velocities drawn uniformly.

    Parameters
    ----------
    count : int
        Number of scatterers C.
    center_range : float
        Range bracketed by the rings [m].
    spacing : float
        Ring spacing [m].
    power : float
        Mean power of each scatterer (linear).
    grid : OfdmGrid
    rng : numpy.random.Generator
    rings : int, optional
        Number of rings (even).

    Returns
    -------
    list of Scatterer

    """
    if rings < 2 or rings % 2:
        raise ValueError(f'rings must be a positive even number, got {rings}')
    offsets = np.concatenate([-np.arange(rings // 2, 0, -1), np.arange(1, rings // 2 + 1)])
    radii = center_range + spacing * offsets
    if np.any(radii <= 0):
        raise ValueError('clutter ring radii must be positive, reduce spacing')
    amplitude = amplitude or AmplitudeModel()
    theta = _deg2rad(rng.uniform(azimuth_deg[0], azimuth_deg[1], count))
    v = rng.uniform(velocity[0], velocity[1], count)
    ring = np.arange(count) % rings
    return [Scatterer('cold_clutter', float(theta[c]), float(_delay_from_range(radii[ring[c]])),
                      float(doppler_from_velocity(v[c], grid.f0)), power, amplitude,
                      name=f'clutter{c}')
            for c in range(count)]


def scale_clutter_to_scnr(scene, scnr_db, target=None):
    """Rescale cold-clutter powers to a pre-processing SCNR

    SCNR is the target power over the cold-clutter, hot-clutter and noise
    power per receive element.

    Raises
    ------
    ValueError
        If the scene has no target or cold clutter, or the other
        disturbances alone already exceed the allowed interference power.

    """
    targets = [s for s in scene.targets if target is None or s.name == target]
    clutter = scene.clutter
    if not targets or not clutter:
        raise ValueError('SCNR scaling needs a target and cold clutter')
    allowed = targets[0].power / _db2lin(scnr_db)
    other = sum(g.power for g in scene.hot_paths) + scene.noise.power(scene.N_r)
    current = sum(s.power for s in clutter)
    if allowed <= other or current <= 0:
        raise ValueError(f'SCNR of {scnr_db} dB cannot be reached by scaling cold clutter')
    factor = (allowed - other) / current
    logging.debug(f'Scaling cold clutter by {10 * np.log10(factor):.1f} dB')
    scatterers = [dataclasses.replace(s, power=s.power * factor, profile=s.profile * factor)
                  if s.role == 'cold_clutter' else s for s in scene.scatterers]
    return dataclasses.replace(scene, scatterers=scatterers)


@dataclass
class ObjectConfig:
    azimuth_deg: float
    range_m: float
    velocity_mps: float = 0.0
    power: float = 1.0
    role: str = 'target'
    name: str = ''
    amplitude: dict = None
    fixed_gain: bool = False
    azimuth_tx_deg: float = None


@dataclass
class ClutterConfig:
    count: int = 0
    rings: int = Constants.CLUTTER_RINGS
    center_range_m: float = None
    spacing_m: float = None
    power: float = 1.0
    amplitude: dict = None
    azimuth_deg: tuple = Constants.CLUTTER_AZIMUTH_DEG
    velocity_mps: tuple = Constants.CLUTTER_VELOCITY


@dataclass
class HotPathConfig:
    azimuth_deg: float
    range_m: float
    power: float
    velocity_mps: float = 0.0
    emitter_id: int = 0
    cooperative: bool = False


@dataclass
class NoiseConfig:
    kind: str = 'white'
    sigma2: float = 1.0
    rho: float = 0.0
    texture: str = 'gamma'
    nu: float = 1.0


@dataclass
class FrequencyConfig:
    B_c: float
    phi_dep_deg: float = 5.0
    sigma_h: float = 0.0
    xi_c: float = 1.0
    D_dom: float = 1.0
    terrain: dict = None


@dataclass
class SceneConfig:
    """Boundary form of a scene: degrees, metres and m/s"""

    f0: float = Constants.REFERENCE['f0']
    delta_f: float = Constants.REFERENCE['delta_f']
    N: int = Constants.DESK['N']
    L: int = Constants.DESK['L']
    T_cp: float = None
    wideband: bool = True
    N_t: int = Constants.DESK['N_t']
    N_r: int = Constants.DESK['N_r']
    objects: list = field(default_factory=list)
    clutter: ClutterConfig = field(default_factory=ClutterConfig)
    hot_paths: list = field(default_factory=list)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    frequency: FrequencyConfig = None
    fading: str = 'block'
    scnr_db: float = None
    strict: bool = False
    seed: int = 0


def _amplitude(spec, field_path):
    if spec is None:
        return AmplitudeModel()
    try:
        return AmplitudeModel(spec['kind'], dict(spec.get('params', {})))
    except (KeyError, ValueError) as e:
        raise ConfigError(str(e), field_path)


def _check_delay(tau, grid, strict, field_path):
    if tau > grid.T_cp:
        message = f'delay {tau:.3e} s exceeds the cyclic prefix {grid.T_cp:.3e} s'
        if strict:
            raise ConfigError(message, field_path)
        logging.warning(f'{field_path}: {message}')


def _noise(config, N_r, field_path='scene.noise'):
    if config.kind == 'white':
        return NoiseSpec('white', config.sigma2)
    if config.kind == 'colored':
        if not 0 <= config.rho < 1:
            raise ConfigError('rho must lie in [0, 1)', field_path + '.rho')
        i = np.arange(N_r)
        return NoiseSpec('colored', config.sigma2,
                         config.sigma2 * config.rho ** np.abs(i[:, None] - i[None, :]))
    if config.kind == 'sirv':
        amplitude = _amplitude({'kind': 'sirv', 'params': {
            'texture': config.texture, 'nu': config.nu, 'shape': np.eye(N_r)}}, field_path)
        return NoiseSpec('sirv', config.sigma2, amplitude=amplitude)
    raise ConfigError('noise kind must be "white", "colored" or "sirv"', field_path + '.kind')


def build_scene(config):
    """Resolve a SceneConfig into a Scene

    Angles are converted to radians, ranges to round-trip delays and
    velocities to Doppler shifts (two-way for scatterers, one-way for hot
    paths). Cold clutter rings are drawn from stream 0 of the scene seed.

    Raises
    ------
    ConfigError
        On invalid geometry, negative powers, or delays beyond the cyclic
        prefix when `strict` is set.

    """
    try:
        grid = OfdmGrid(config.f0, config.delta_f, config.N, config.L, config.T_cp,
                        wideband=config.wideband)
    except ValueError as e:
        raise ConfigError(str(e), 'scene')
    if int(config.N_t) < 1 or int(config.N_r) < 1:
        raise ConfigError('array element counts must be >= 1', 'scene.N_t')
    tx_array = ArrayGeometry.ula(config.N_t, grid.f0)
    rx_array = ArrayGeometry.ula(config.N_r, grid.f0)

    scatterers = []
    for i, obj in enumerate(config.objects):
        path = f'scene.objects[{i}]'
        if obj.power < 0:
            raise ConfigError(f'power must be >= 0, got {obj.power}', path + '.power')
        if obj.range_m < 0:
            raise ConfigError(f'range must be >= 0, got {obj.range_m}', path + '.range_m')
        if obj.role not in ROLES:
            raise ConfigError('role must be "target" or "cold_clutter"', path + '.role')
        tau = _delay_from_range(obj.range_m)
        _check_delay(tau, grid, config.strict, path)
        theta_tx = None if obj.azimuth_tx_deg is None else _deg2rad(obj.azimuth_tx_deg)
        scatterers.append(Scatterer(
            obj.role, _deg2rad(obj.azimuth_deg), tau, doppler_from_velocity(obj.velocity_mps, grid.f0),
            obj.power, _amplitude(obj.amplitude, path + '.amplitude'),
            gain=np.sqrt(obj.power) + 0j if obj.fixed_gain else None,
            theta_tx=theta_tx, name=obj.name or f'object{i}'))

    rng = np.random.Generator(np.random.Philox([int(config.seed), 0]))
    cc = config.clutter
    if cc.count:
        if cc.power < 0:
            raise ConfigError(f'power must be >= 0, got {cc.power}', 'scene.clutter.power')
        center = cc.center_range_m
        if center is None:
            if not config.objects:
                raise ConfigError('clutter rings need center_range_m or a target', 'scene.clutter')
            center = config.objects[0].range_m
        spacing = cc.spacing_m if cc.spacing_m is not None else grid.range_resolution / 2.0
        try:
            rings = clutter_rings(int(cc.count), center, spacing, cc.power, grid, rng, cc.rings,
                                  tuple(cc.azimuth_deg), tuple(cc.velocity_mps),
                                  _amplitude(cc.amplitude, 'scene.clutter.amplitude'))
        except ValueError as e:
            raise ConfigError(str(e), 'scene.clutter')
        for s in rings:
            _check_delay(s.tau, grid, config.strict, 'scene.clutter')
        scatterers += rings

    hot_paths = []
    for i, hp in enumerate(config.hot_paths):
        path = f'scene.hot_paths[{i}]'
        if hp.power < 0:
            raise ConfigError(f'power must be >= 0, got {hp.power}', path + '.power')
        tau = hp.range_m / Constants.C0
        _check_delay(tau, grid, config.strict, path)
        hot_paths.append(HotPath(_deg2rad(hp.azimuth_deg), tau,
                                 doppler_from_velocity(hp.velocity_mps, grid.f0) / 2.0,
                                 hp.power, hp.emitter_id, hp.cooperative))

    if config.noise.sigma2 < 0:
        raise ConfigError(f'noise power must be >= 0, got {config.noise.sigma2}',
                          'scene.noise.sigma2')
    noise = _noise(config.noise, rx_array.count)

    freq_model = None
    if config.frequency is not None:
        fc = config.frequency
        try:
            freq_model = FrequencyModel(fc.B_c, _deg2rad(fc.phi_dep_deg), fc.sigma_h, fc.xi_c,
                                        fc.D_dom, GitParams(**(fc.terrain or {})))
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e), 'scene.frequency')

    try:
        scene = Scene(grid, tx_array, rx_array, scatterers, hot_paths, noise, int(config.seed),
                      freq_model, config.fading)
    except ValueError as e:
        raise ConfigError(str(e), 'scene')
    if config.scnr_db is not None:
        try:
            scene = scale_clutter_to_scnr(scene, config.scnr_db)
        except ValueError as e:
            raise ConfigError(str(e), 'scene.scnr_db')
    logging.info(f'Scene {scene.digest()}: {len(scene.targets)} targets, '
                 f'{len(scene.clutter)} clutter scatterers, {len(hot_paths)} hot paths')
    return scene
