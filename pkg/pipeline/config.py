"""Experiment configuration: one nested JSON document per run

Sections are ``scene``, ``pipeline``, ``optimization`` and ``output`` plus a
top-level ``seed`` and an optional experiment ``preset``. Angles are given in
degrees, ranges in metres and velocities in m/s.
"""
import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field

from isaclab.constants import Constants
from isaclab.errors import ConfigError
from isaclab.scene.model import (ClutterConfig, FrequencyConfig, HotPathConfig, NoiseConfig,
                                 ObjectConfig, SceneConfig)

PRESETS = ('cold_only', 'mixed', 'stap_compare', 'blp_tradeoff', 'slp_stap')
BUNDLED = {
    'reference': os.path.join(os.path.dirname(os.path.abspath(__file__)), 'presets', 'reference.json'),
    'desk': os.path.join(os.path.dirname(os.path.abspath(__file__)), 'presets', 'desk.json'),
}
MODULATIONS = ('bpsk', 'qpsk', 'psk8', 'qam16', 'qam64', 'qam256')
AOA_METHODS = ('bartlett', 'capon', 'music')
GATING = ('mrc', 'zf', 'mmse')
DERANDOMIZATION = ('rf', 'mf', 'lmmse', 'hybrid')
SLOW_TIME = ('sdc', 'symbol_avg', 'rma', 'csd', 'kalman')
COVARIANCE_SOURCES = ('scene', 'training')
ESTIMATORS = ('scm', 'tyler', 'oas', 'diag_load')
STAP_VARIANTS = ('classical', 'rd', 'rr', 'structured')
DETECTORS = ('ca_cfar', 'glrt_fixed')
PROBLEMS = ('blp', 'slp')
TX_METHODS = ('sdr', 'ccp')
FORMATS = ('csv', 'plot')


@dataclass(frozen=True)
class PipelineConfig:
    modulation: str = Constants.REFERENCE['modulation']
    probe: bool = False
    tx_beams_deg: tuple = None
    aoa_method: str = 'music'
    sources: int = None
    gating: str = 'mrc'
    gate_directions_deg: tuple = None
    derandomization: str = 'rf'
    suppression: tuple = ('rma',)
    rho: float = Constants.RMA_RHO
    G_d: int = 1
    covariance: str = 'scene'
    estimators: tuple = ('scm', 'diag_load')
    n_tr: int = 64
    stap: str = 'classical'
    rank: int = None
    detector: str = 'ca_cfar'
    p_fa: float = 1e-3
    zeta: float = None
    angle_step_deg: float = Constants.ANGLE_STEP_DEG
    target: str = None
    trials: int = 1


@dataclass(frozen=True)
class OptimizationConfig:
    problem: str = 'blp'
    method: str = 'sdr'
    users: tuple = (2, 6)
    gamma_db: tuple = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0)
    P_tot: float = None
    subcarriers: int = 8
    sigma2_comm: float = 1.0
    omega: int = 4
    gamma_bar: float = 0.5
    slp_symbols: int = 4
    slp_subcarriers: int = 1
    starts: int = Constants.SLP_STARTS
    max_outer: int = Constants.MAX_OUTER
    tol: float = Constants.DINKELBACH_TOL


@dataclass(frozen=True)
class OutputConfig:
    formats: tuple = ('csv', 'plot')
    out_dir: str = 'runs/'


@dataclass(frozen=True)
class ExperimentConfig:
    scene: SceneConfig = field(default_factory=SceneConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    optimization: OptimizationConfig = field(default_factory=OptimizationConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0
    preset: str = None

    def digest(self):
        """Content hash of the resolved configuration, output section excluded"""
        values = to_dict(self)
        values.pop('output')
        text = json.dumps(values, sort_keys=True, default=str)
        return hashlib.sha1(text.encode()).hexdigest()[:12]


# nested sections: field name -> (dataclass, is a list)
NESTED = {
    ExperimentConfig: {'scene': (SceneConfig, False), 'pipeline': (PipelineConfig, False),
                       'optimization': (OptimizationConfig, False), 'output': (OutputConfig, False)},
    SceneConfig: {'objects': (ObjectConfig, True), 'clutter': (ClutterConfig, False),
                  'hot_paths': (HotPathConfig, True), 'noise': (NoiseConfig, False),
                  'frequency': (FrequencyConfig, False)},
}
CHOICES = {
    'pipeline.modulation': MODULATIONS,
    'pipeline.aoa_method': AOA_METHODS,
    'pipeline.gating': GATING,
    'pipeline.derandomization': DERANDOMIZATION,
    'pipeline.covariance': COVARIANCE_SOURCES,
    'pipeline.stap': STAP_VARIANTS,
    'pipeline.detector': DETECTORS,
    'optimization.problem': PROBLEMS,
    'optimization.method': TX_METHODS,
    'scene.noise.kind': ('white', 'colored', 'sirv'),
    'scene.fading': ('block', 'per_symbol'),
    'preset': PRESETS,
}
LIST_CHOICES = {
    'pipeline.suppression': SLOW_TIME,
    'pipeline.estimators': ESTIMATORS,
    'output.formats': FORMATS,
}


def _build(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError(f'expected an object, got {type(data).__name__}', path or None)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        where = f'{path}.{unknown[0]}' if path else unknown[0]
        raise ConfigError('unknown key', where)
    nested = NESTED.get(cls, {})
    kwargs = {}
    for key, value in data.items():
        where = f'{path}.{key}' if path else key
        if key in nested and value is not None:
            sub, many = nested[key]
            if many:
                if not isinstance(value, list):
                    raise ConfigError('expected a list', where)
                value = [_build(sub, v, f'{where}[{i}]') for i, v in enumerate(value)]
            else:
                value = _build(sub, value, where)
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as e:
        raise ConfigError(str(e), path or None)


def _check_choices(config):
    values = to_dict(config)
    for where, allowed in CHOICES.items():
        value = _lookup(values, where)
        if value is not None and value not in allowed:
            raise ConfigError(f'{value!r} is not one of {", ".join(allowed)}', where)
    for where, allowed in LIST_CHOICES.items():
        for i, value in enumerate(_lookup(values, where) or ()):
            if value not in allowed:
                raise ConfigError(f'{value!r} is not one of {", ".join(allowed)}', f'{where}[{i}]')


def _lookup(values, where):
    for key in where.split('.'):
        if values is None:
            return None
        values = values.get(key)
    return values


def _check_nonnegative(value, where, strict=False):
    if value is None:
        return
    if value < 0 or (strict and value == 0):
        bound = '> 0' if strict else '>= 0'
        raise ConfigError(f'must be {bound}, got {value}', where)


def _check_values(config):
    sc = config.scene
    for name in ('f0', 'delta_f'):
        _check_nonnegative(getattr(sc, name), f'scene.{name}', strict=True)
    for name in ('N', 'L', 'N_t', 'N_r'):
        if int(getattr(sc, name)) < 1:
            raise ConfigError(f'must be >= 1, got {getattr(sc, name)}', f'scene.{name}')
    _check_nonnegative(sc.T_cp, 'scene.T_cp')
    for i, obj in enumerate(sc.objects):
        _check_nonnegative(obj.power, f'scene.objects[{i}].power')
        _check_nonnegative(obj.range_m, f'scene.objects[{i}].range_m')
    _check_nonnegative(sc.clutter.power, 'scene.clutter.power')
    _check_nonnegative(sc.clutter.count, 'scene.clutter.count')
    for i, hp in enumerate(sc.hot_paths):
        _check_nonnegative(hp.power, f'scene.hot_paths[{i}].power')
    _check_nonnegative(sc.noise.sigma2, 'scene.noise.sigma2')

    pc = config.pipeline
    _check_nonnegative(pc.n_tr, 'pipeline.n_tr', strict=True)
    _check_nonnegative(pc.trials, 'pipeline.trials', strict=True)
    _check_nonnegative(pc.angle_step_deg, 'pipeline.angle_step_deg', strict=True)
    if not 0 < pc.p_fa < 1:
        raise ConfigError(f'must lie in (0, 1), got {pc.p_fa}', 'pipeline.p_fa')
    if not 0 < pc.rho < 1:
        raise ConfigError(f'must lie in (0, 1), got {pc.rho}', 'pipeline.rho')
    if pc.detector == 'glrt_fixed' and pc.zeta is None:
        raise ConfigError('glrt_fixed needs a threshold', 'pipeline.zeta')
    if pc.estimators and pc.estimators[0] not in ('scm', 'tyler'):
        raise ConfigError('the estimator chain starts with "scm" or "tyler"', 'pipeline.estimators[0]')

    oc = config.optimization
    _check_nonnegative(oc.P_tot, 'optimization.P_tot', strict=True)
    _check_nonnegative(oc.sigma2_comm, 'optimization.sigma2_comm', strict=True)
    _check_nonnegative(oc.gamma_bar, 'optimization.gamma_bar', strict=True)
    for i, K in enumerate(oc.users):
        _check_nonnegative(K, f'optimization.users[{i}]')
    for name in ('subcarriers', 'slp_symbols', 'slp_subcarriers', 'starts', 'max_outer'):
        _check_nonnegative(getattr(oc, name), f'optimization.{name}', strict=True)
    if oc.subcarriers > sc.N or oc.slp_subcarriers > sc.N:
        raise ConfigError(f'cannot exceed the {sc.N} grid subcarriers', 'optimization.subcarriers')
    if int(oc.omega) < 2:
        raise ConfigError(f'must be >= 2, got {oc.omega}', 'optimization.omega')
    if config.seed < 0:
        raise ConfigError(f'must be >= 0, got {config.seed}', 'seed')


def config_from_dict(data):
    """Validate a parsed document and apply defaults

    Raises
    ------
    ConfigError
        On unknown keys, invalid enum values or out-of-range numbers, with
        the offending field path in the message.

    """
    config = _build(ExperimentConfig, data, '')
    _check_choices(config)
    _check_values(config)
    if config.scene.T_cp is None:
        T_cp = 1.0 / (Constants.CP_FACTOR * config.scene.delta_f)
        config = dataclasses.replace(config, scene=dataclasses.replace(config.scene, T_cp=T_cp))
    if config.scene.seed != config.seed:
        config = dataclasses.replace(config, scene=dataclasses.replace(config.scene, seed=config.seed))
    return config


def parse_config(path):
    """Read a JSON experiment document, or a bundled one by name ('reference', 'desk')"""
    path = BUNDLED.get(path, path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f'{path}: {e}')
    except OSError as e:
        raise ConfigError(f'cannot read {path}: {e.strerror}', 'config')
    return config_from_dict(data)


def to_dict(config):
    return dataclasses.asdict(config)
