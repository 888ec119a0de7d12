"""Experiment runners behind the driver

Every runner takes a validated ExperimentConfig and returns an
ArtifactBundle; nothing here touches the filesystem. Random streams of a
scene seed: 0 clutter rings, 1 cube synthesis, 2 transmit symbols,
3 training CPIs, 4 user channels and SLP symbols.
"""
import dataclasses
import logging

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import ndimage
from tqdm import tqdm

from isaclab.channel.arrays import spatial_steering, steering_matrix
from isaclab.channel.synthesis import DataCube, synthesize_cube
from isaclab.constants import Constants
from isaclab.covariance.estimate import CovEstimate, regularize, sample_covariance, tyler_shape
from isaclab.covariance.hot import hot_clutter_cov
from isaclab.covariance.kernel import space_time_kernel, spatial_kernel
from isaclab.covariance.structured import select_rank
from isaclab.errors import ConfigError, InfeasibleError, NumericalError
from isaclab.optim.baselines import comm_only, heuristic, radar_only
from isaclab.optim.blp import blp_optimize
from isaclab.optim.problem import BlpProblem, SlpProblem
from isaclab.optim.slp import slp_stap_optimize
from isaclab.rx.detection import ca_cfar, detect
from isaclab.rx.gating import angle_gate, gated_waveform
from isaclab.rx.ranging import derandomize, range_doppler_map, snr_from_scene
from isaclab.rx.spectra import aoa_spectrum
from isaclab.scene.grid import OfdmGrid
from isaclab.scene.model import build_scene
from isaclab.suppression.maps import angle_doppler_map, default_map_axes
from isaclab.suppression.slowtime import SlowTimeFilter, slow_time_filter
from isaclab.suppression.stap import dft_beamspace_basis, effective_steering, output_scnr, stap_weights
from isaclab.units import _db2lin, _deg2rad, _lin2db
from isaclab.waveform.precoding import apply_precoder, beam_precoder, identity_precoder
from isaclab.waveform.symbols import generate_symbol_grid, psk_constellation

import utils
from config import PRESETS
from outputs import ArtifactBundle

EXPERIMENTS = ('pipeline', 'optimize') + PRESETS
STAP_SUBCARRIERS = 8


def resolve_scene(config, full_scale=False):
    """Scene of a config, optionally at the full reference dimensions"""
    sc = config.scene
    if full_scale:
        sc = dataclasses.replace(sc, **{k: Constants.REFERENCE[k] for k in ('N', 'L', 'N_t', 'N_r')})
    return build_scene(sc)


def transmit_waveform(scene, pc, rng=None):
    """Sensing waveform: one data stream per antenna, or beams toward tx_beams_deg"""
    grid = scene.grid
    rng = scene.rng(2) if rng is None else rng
    if pc.tx_beams_deg:
        W = beam_precoder(grid, scene.tx_array, _deg2rad(np.asarray(pc.tx_beams_deg, dtype=float)), 1.0)
    else:
        W = identity_precoder(grid.N, scene.N_t)
    S = generate_symbol_grid(grid, 0, W.N_s, pc.modulation, rng, probe=pc.probe)
    return apply_precoder(W, S)


def synth(config, full_scale=False):
    """Scene, transmit record and one synthesised CPI"""
    scene = resolve_scene(config, full_scale)
    tx = transmit_waveform(scene, config.pipeline)
    cube = synthesize_cube(scene, tx, scene.rng(1))
    return scene, tx, cube


def _target(scene, name=None):
    targets = [t for t in scene.targets if name is None or t.name == name]
    if not targets:
        raise ConfigError(f'no target named {name!r} in the scene' if name else 'the scene has no target',
                          'pipeline.target')
    return targets[0]


def _cfar_window(shape, guard=Constants.CFAR_GUARD, train=Constants.CFAR_TRAIN):
    """Guard and training cells shrunk until the cross window fits the map"""
    size = min(shape)
    while 2 * (guard + train) + 1 > size and train > 1:
        train -= 1
    while 2 * (guard + train) + 1 > size and guard > 0:
        guard -= 1
    if 2 * (guard + train) + 1 > size:
        raise ConfigError(f'a {shape} map is too small for CFAR detection', 'scene')
    return guard, train


# ------------------------------------------------------------------
# Covariances
# ------------------------------------------------------------------

def scene_covariance(scene, tx, n):
    """Space-time disturbance covariance of subcarrier n from the declared scene

    Cold clutter enters through the waveform-aware steering of every
    patch; hot clutter and noise are white over slow time.
    """
    grid, N_r = scene.grid, scene.N_r
    R = np.zeros((grid.L * N_r, grid.L * N_r), dtype=complex)
    for c in scene.clutter:
        v = effective_steering(tx, n, c.theta, c.f_D, scene.tx_array, scene.rx_array, grid, c.theta_tx)
        R += c.profile[n] * np.outer(v, v.conj())
    R_sp = hot_clutter_cov('model', scene, subcarriers=[n]).R + scene.noise.covariance(n, N_r)
    R += np.kron(np.eye(grid.L), R_sp)
    return CovEstimate(R, 'space_time', 'scene_model', metadata={'subcarrier': int(n)})


def estimate_chain(snapshots, estimators, domain='space_time'):
    """Run an estimator chain such as ('scm', 'oas') on (dim, N_tr) snapshots"""
    first, rest = estimators[0], estimators[1:]
    try:
        if first == 'tyler':
            est = tyler_shape(snapshots, domain=domain)
        else:
            est = sample_covariance(snapshots, domain=domain)
        for i, method in enumerate(rest, start=1):
            if method not in ('oas', 'diag_load'):
                raise ConfigError(f'{method!r} can only start the chain', f'pipeline.estimators[{i}]')
            est = regularize(est, method)
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e), 'pipeline.estimators')
    return est


def training_covariances(scene, tx, pc, subcarriers):
    """Estimated covariances from n_tr target-free CPIs"""
    quiet = dataclasses.replace(scene, scatterers=scene.clutter)
    rng = scene.rng(3)
    snapshots = {int(n): [] for n in subcarriers}
    for _ in tqdm(range(pc.n_tr), desc='training CPIs', leave=False):
        cube = synthesize_cube(quiet, tx, rng)
        for n in snapshots:
            snapshots[n].append(cube.snapshot(n))
    return [estimate_chain(np.stack(snapshots[int(n)], axis=1), pc.estimators) for n in subcarriers]


def disturbance_covariances(scene, tx, pc, subcarriers):
    if pc.covariance == 'training':
        return training_covariances(scene, tx, pc, subcarriers)
    return [scene_covariance(scene, tx, n) for n in subcarriers]


# ------------------------------------------------------------------
# Receive chain
# ------------------------------------------------------------------

def aoa_frame(cube, scene, pc):
    """Subband AoA pseudo-spectrum, normalised to its maximum"""
    grid = cube.grid
    est = sample_covariance(cube, 'subband')
    n = int(np.median(est.metadata['subcarriers']))
    thetas = default_map_axes(grid, pc.angle_step_deg)[0]
    sources = pc.sources
    if pc.aoa_method == 'music' and sources is None:
        sources = select_rank(np.linalg.eigvalsh(est.R)[::-1], 'mdl', est.support)
        if sources >= scene.N_r:
            logging.warning(f'MDL selected {sources} sources, capping at N_r - 1')
            sources = scene.N_r - 1
    spectrum = aoa_spectrum(pc.aoa_method, est, steering_matrix(scene.rx_array, thetas, n, grid), sources)
    power = _lin2db(np.maximum(spectrum / spectrum.max(), 1e-30))
    return pd.DataFrame({'angle_deg': np.rad2deg(thetas), 'power_db': power})


def gate_directions(scene, pc):
    if pc.gate_directions_deg:
        return _deg2rad(np.asarray(pc.gate_directions_deg, dtype=float))
    if not scene.targets:
        raise ConfigError('no targets to gate toward, set gate_directions_deg',
                          'pipeline.gate_directions_deg')
    return np.array(sorted({t.theta for t in scene.targets}))


def ridge_energy(rdm):
    """Energy in the Doppler bins |m| <= 1 around zero velocity"""
    L = rdm.chi.shape[1]
    bins = sorted({0, 1 % L, (L - 1) % L})
    return float(np.sum(np.abs(rdm.chi[:, bins]) ** 2))


def suppress(series, pc):
    """Apply the configured slow-time filters in order"""
    residual = series
    for method in pc.suppression:
        residual = slow_time_filter(residual, SlowTimeFilter(method, G_d=pc.G_d, rho=pc.rho)).residual
    return residual


def gate_chain(cube, tx, scene, pc):
    """Gate, de-randomise, map, suppress and detect toward every gating direction

    Returns
    -------
    list of dict
        One entry per direction with the pre- and post-suppression maps,
        the detection report and the ridge energies.

    """
    thetas = gate_directions(scene, pc)
    gated = angle_gate(cube, thetas, pc.gating, scene.rx_array, scene.noise.power(scene.N_r))
    snr_in = snr_from_scene(scene) if pc.derandomization == 'lmmse' else None
    results = []
    for p, theta in enumerate(thetas):
        X = gated_waveform(tx, scene.tx_array, theta, cube.grid)
        H = derandomize(gated.Y[p], X, pc.derandomization, snr_in)
        pre = range_doppler_map(H, cube.grid)
        post = range_doppler_map(suppress(H, pc), cube.grid)
        guard, train = _cfar_window(post.chi.shape)
        report = detect(post, pc.detector, pc.zeta, pc.p_fa, guard, train)
        ridge = (ridge_energy(pre), ridge_energy(post))
        logging.info(f'Gate {np.rad2deg(theta):+.1f} deg: {len(report)} detections, '
                     f'ridge reduced by {_lin2db(ridge[0] / max(ridge[1], 1e-300)):.1f} dB')
        results.append({'theta': float(theta), 'pre': pre, 'post': post, 'report': report, 'ridge': ridge})
    return results


def map_metrics(adm, target, p_fa=1e-3):
    """Rank of the target among local peaks, whether it is the global maximum, and a CFAR flag

    The target cell is the strongest cell within one bin of the true
    (theta, f_D).
    """
    values = adm.values
    p = utils.nearest_index(adm.thetas, target.theta)
    m = utils.nearest_index(adm.dopplers, target.f_D)
    window = (slice(max(p - 1, 0), p + 2), slice(max(m - 1, 0), m + 2))
    level = values[window].max()
    peaks = values[values == ndimage.maximum_filter(values, size=3, mode='nearest')]
    top_p, top_m = np.unravel_index(np.argmax(values), values.shape)
    guard, train = _cfar_window(values.shape)
    detected = bool(np.any((values > ca_cfar(values, p_fa, guard, train))[window]))
    return {'rank': int(np.sum(peaks > level)) + 1,
            'argmax_hit': bool(abs(top_p - p) <= 1 and abs(top_m - m) <= 1),
            'detected': detected,
            'target_db': float(_lin2db(max(level, 1e-30)))}


def target_maps(cube, tx, scene, pc, target, n_jobs=1):
    """Angle-Doppler maps at the target's range gate: raw, slow-time filtered and STAP"""
    grid = cube.grid
    thetas, dopplers = default_map_axes(grid, pc.angle_step_deg)
    common = dict(tx_array=scene.tx_array, rx_array=scene.rx_array, thetas=thetas, dopplers=dopplers,
                  n_jobs=n_jobs)
    maps = {'matched': angle_doppler_map(cube, tx, target.tau, **common)}
    filtered = DataCube(suppress(cube.y, pc), grid, cube.seed, cube.scene_digest)
    maps['filtered'] = angle_doppler_map(filtered, tx, target.tau, **common)
    covariances = disturbance_covariances(scene, tx, pc, grid.subcarriers)
    if pc.stap == 'rr' and pc.rank is not None:
        maps['stap'] = angle_doppler_map(cube, tx, target.tau, weights='rr', covariances=covariances,
                                         rank=pc.rank, **common)
    else:
        maps['stap'] = angle_doppler_map(cube, tx, target.tau, weights='stap', covariances=covariances,
                                         **common)
    return maps


def run_pipeline(config, scene=None, tx=None, cube=None, n_jobs=1, full_scale=False):
    """End-to-end receive chain on one CPI"""
    if cube is None:
        scene, tx, cube = synth(config, full_scale)
    pc = config.pipeline
    bundle = ArtifactBundle('pipeline', config.seed, config.digest())
    bundle.add('aoa_spectrum', 'spectrum', aoa_frame(cube, scene, pc), f'{pc.aoa_method} AoA spectrum')

    detections = []
    for gate in gate_chain(cube, tx, scene, pc):
        tag = f'{np.rad2deg(gate["theta"]):+.0f}deg'
        bundle.add(f'rdm_pre_{tag}', 'rdm', gate['pre'].to_frame(), f'RDM at {tag}, before suppression')
        bundle.add(f'rdm_post_{tag}', 'rdm', gate['post'].to_frame(), f'RDM at {tag}, after suppression')
        frame = gate['report'].to_frame()
        frame['gate_deg'] = np.rad2deg(gate['theta'])
        detections.append(frame)
        pre, post = gate['ridge']
        bundle.summary[f'ridge_reduction_db_{tag}'] = float(_lin2db(pre / max(post, 1e-300)))
    bundle.add('detections', 'detections', pd.concat(detections, ignore_index=True), facet='gate_deg')

    if scene.targets:
        target = _target(scene, pc.target)
        maps = target_maps(cube, tx, scene, pc, target, n_jobs)
        for name, adm in maps.items():
            bundle.add(f'adm_{name}', 'adm', adm.to_frame(), f'{name} angle-Doppler map at {target.name}')
            for key, value in map_metrics(adm, target, pc.p_fa).items():
                bundle.summary[f'{name}_{key}'] = value
        bundle.summary['target'] = target.name
    bundle.summary['scene_digest'] = scene.digest()
    return bundle


# ------------------------------------------------------------------
# Presets
# ------------------------------------------------------------------

def _without_hot_paths(config):
    return dataclasses.replace(config, scene=dataclasses.replace(config.scene, hot_paths=[]))


def run_cold_only(config, n_jobs=1, full_scale=False):
    bundle = run_pipeline(_without_hot_paths(config), n_jobs=n_jobs, full_scale=full_scale)
    bundle.name = 'cold_only'
    return bundle


def _trial_config(config, trial):
    seed = utils.trial_seed(config.seed, trial)
    return dataclasses.replace(config, seed=seed, scene=dataclasses.replace(config.scene, seed=seed))


def _mixed_trial(config, trial, full_scale):
    trial_config = _trial_config(config, trial)
    scene, tx, cube = synth(trial_config, full_scale)
    pc = config.pipeline
    target = _target(scene, pc.target)
    gates = gate_chain(cube, tx, scene, pc)
    maps = target_maps(cube, tx, scene, pc, target)
    rows = []
    for name, adm in maps.items():
        for key, value in map_metrics(adm, target, pc.p_fa).items():
            rows.append((trial, trial_config.seed, f'{name}_{key}', float(value)))
    for gate in gates:
        pre, post = gate['ridge']
        rows.append((trial, trial_config.seed, f'ridge_reduction_db_{np.rad2deg(gate["theta"]):+.0f}deg',
                     float(_lin2db(pre / max(post, 1e-300)))))
    return rows, (scene, tx, cube) if trial == 0 else None


def run_mixed(config, n_jobs=1, full_scale=False):
    """Cold plus hot clutter over seeded Monte-Carlo trials"""
    if not config.scene.hot_paths:
        raise ConfigError('the mixed experiment needs at least one hot path', 'scene.hot_paths')
    trials = int(config.pipeline.trials)
    results = Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(_mixed_trial)(config, k, full_scale) for k in tqdm(range(trials), desc='trials'))
    rows = [row for trial_rows, _ in results for row in trial_rows]
    scene, tx, cube = results[0][1]
    bundle = run_pipeline(_trial_config(config, 0), scene, tx, cube)
    bundle.name = 'mixed'
    bundle.seed = config.seed
    bundle.config_hash = config.digest()
    frame = pd.DataFrame(rows, columns=['trial', 'seed', 'metric', 'value'])
    bundle.add('trials', 'trials', frame)
    means = frame.groupby('metric')['value'].mean()
    bundle.summary.update({f'mean_{k}': float(v) for k, v in means.items()})
    bundle.summary['trials'] = trials
    return bundle


def _stap_kwargs(variant, scene, tx, pc, target, n, R_hat):
    grid = scene.grid
    if variant == 'rd':
        a = spatial_steering(scene.tx_array, target.theta_tx, n, grid)
        return {'T_RD': dft_beamspace_basis(target.theta, target.f_D, n, scene.rx_array, grid, 3, 3,
                                            probe=tx.x[n] @ a.conj())}
    if variant == 'rr':
        if pc.rank is not None:
            return {'rank': pc.rank}
        return {'criterion': 'mdl' if R_hat.support is not None else 'threshold'}
    if variant == 'structured':
        return {'dims': (grid.L, scene.N_r)}
    return {}


def run_stap_compare(config, n_jobs=1, full_scale=False):
    """Output SCNR of every STAP variant against the clairvoyant bound on a few subcarriers"""
    scene, tx, cube = synth(config, full_scale)
    pc = config.pipeline
    target = _target(scene, pc.target)
    grid = scene.grid
    ns = np.unique(np.linspace(0, grid.N - 1, min(STAP_SUBCARRIERS, grid.N)).round().astype(int))
    truth = [scene_covariance(scene, tx, n) for n in ns]
    estimates = disturbance_covariances(scene, tx, pc, ns) if pc.covariance == 'training' else truth

    rows = []
    for n, R_true, R_hat in tqdm(list(zip(ns, truth, estimates)), desc='subcarriers'):
        v = effective_steering(tx, n, target.theta, target.f_D, scene.tx_array, scene.rx_array, grid,
                               target.theta_tx)
        w_opt = np.linalg.solve(R_true.R, v)
        rows.append(('bound', int(n), float(_lin2db(output_scnr(w_opt, v, R_true)))))
        for variant in ('classical', 'rd', 'rr', 'structured'):
            try:
                weights = stap_weights(R_hat, v, variant, bin=(target.theta, target.f_D, int(n)),
                                       **_stap_kwargs(variant, scene, tx, pc, target, n, R_hat))
                scnr_db = float(_lin2db(max(output_scnr(weights.w, v, R_true), 1e-300)))
            except (NumericalError, ValueError) as e:
                logging.warning(f'{variant} STAP on subcarrier {n} failed: {e}')
                scnr_db = np.nan
            rows.append((variant, int(n), scnr_db))

    frame = pd.DataFrame(rows, columns=['variant', 'subcarrier', 'scnr_db'])
    bundle = ArtifactBundle('stap_compare', config.seed, config.digest())
    bundle.add('stap_scnr', 'stap', frame, f'STAP output SCNR at {target.name}')
    means = frame.groupby('variant')['scnr_db'].mean()
    bundle.summary.update({f'scnr_db_{k}': float(v) for k, v in means.items()})
    bundle.summary['subcarriers'] = ns.tolist()
    bundle.summary['covariance'] = pc.covariance
    bundle.summary['target'] = target.name
    return bundle


def _crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _problem_subcarriers(grid, count):
    return np.unique(np.linspace(0, grid.N - 1, count).round().astype(int))


def blp_problem(scene, target, H, gamma_db, oc):
    """Block-level design problem over evenly spaced subcarriers of a scene"""
    ns = _problem_subcarriers(scene.grid, oc.subcarriers)
    R_eta = np.stack([hot_clutter_cov('model', scene, subcarriers=[n]).R + scene.noise.covariance(n, scene.N_r)
                      for n in ns])
    P_tot = oc.P_tot or 2.0 * scene.N_t * len(ns)
    return BlpProblem(H, _db2lin(gamma_db), P_tot, target.theta, target.profile[ns],
                      [spatial_kernel(scene, n) for n in ns], R_eta, scene.tx_array, scene.rx_array,
                      scene.grid, ns, oc.sigma2_comm)


def _design_row(K, gamma_db, kind, design):
    return (K, gamma_db, kind, design.scnr_db if design is not None else np.nan)


def _tradeoff_curve(scene, target, K, oc, rng):
    """Sweep SINR thresholds from tight to loose, each optimisation warm-started from the previous"""
    ns = _problem_subcarriers(scene.grid, oc.subcarriers)
    H = _crandn(rng, len(ns), K, scene.N_t)
    rows, optimized, last = [], [], None
    for gamma_db in tqdm(sorted(oc.gamma_db, reverse=True), desc=f'K={K}', leave=False):
        problem = blp_problem(scene, target, H, gamma_db, oc)
        try:
            comm = comm_only(problem)
        except InfeasibleError:
            logging.warning(f'K={K}, gamma={gamma_db} dB: SINR thresholds unreachable within P_tot')
            rows += [_design_row(K, gamma_db, kind, None) for kind in ('comm_only', 'heuristic', 'optimized')]
            continue
        starts = [comm]
        try:
            heur = heuristic(problem)
            starts.append(heur)
        except InfeasibleError:
            logging.warning(f'K={K}, gamma={gamma_db} dB: heuristic baseline is infeasible')
            heur = None
        if last is not None:
            starts.append(last)
        design = blp_optimize(problem, init=starts, max_outer=oc.max_outer, tol=oc.tol, method=oc.method)
        optimized.append(design)
        last = design
        rows += [_design_row(K, gamma_db, 'comm_only', comm), _design_row(K, gamma_db, 'heuristic', heur),
                 _design_row(K, gamma_db, 'optimized', design)]
    return H, rows, optimized


def run_blp_tradeoff(config, n_jobs=1, full_scale=False):
    """Sensing SCNR against the users' SINR threshold for every user count"""
    scene = resolve_scene(config, full_scale)
    oc = config.optimization
    target = _target(scene, config.pipeline.target)
    rng = scene.rng(4)
    bundle = ArtifactBundle('blp_tradeoff', config.seed, config.digest())
    rows = []
    for K in oc.users:
        H, curve, optimized = _tradeoff_curve(scene, target, int(K), oc, rng)
        problem = blp_problem(scene, target, H, min(oc.gamma_db), oc)
        radar = radar_only(problem, warm_start=optimized or None, method=oc.method)
        curve += [_design_row(int(K), g, 'radar_only', radar) for g in oc.gamma_db]
        rows += curve
        if optimized:
            bundle.add(f'trace_K{K}', 'trace', optimized[-1].trace_frame(),
                       f'Dinkelbach trace, K={K}, gamma={min(oc.gamma_db)} dB')
        scnr = [r[3] for r in sorted(curve) if r[2] == 'optimized' and np.isfinite(r[3])]
        bundle.summary[f'monotone_K{K}'] = bool(np.all(np.diff(scnr) <= 1e-6))
        bundle.summary[f'radar_only_scnr_db_K{K}'] = radar.scnr_db
    frame = pd.DataFrame(rows, columns=['K', 'gamma_db', 'kind', 'scnr_db']).sort_values(['K', 'gamma_db', 'kind'])
    for K, part in frame.groupby('K'):
        bundle.add(f'tradeoff_K{K}', 'tradeoff', part, f'SCNR trade-off, K={K}')
    bundle.summary['target'] = target.name
    return bundle


def slp_problem(scene, target, oc, rng, K=None):
    """Symbol-level problem on a short sub-CPI of slp_symbols symbols"""
    grid = scene.grid
    sub_grid = OfdmGrid(grid.f0, grid.delta_f, grid.N, oc.slp_symbols, grid.T_cp, wideband=grid.wideband)
    sub = dataclasses.replace(scene, grid=sub_grid)
    ns = _problem_subcarriers(grid, oc.slp_subcarriers)
    K = int(oc.users[0]) if K is None else K
    L = oc.slp_symbols
    S = psk_constellation(oc.omega)[rng.integers(0, oc.omega, (len(ns), L, K))]
    R_eta = np.stack([np.kron(np.eye(L), hot_clutter_cov('model', sub, subcarriers=[n]).R
                              + scene.noise.covariance(n, scene.N_r)) for n in ns])
    P_tot = oc.P_tot or float(len(ns) * L * scene.N_t)
    return SlpProblem(_crandn(rng, len(ns), K, scene.N_t), S, oc.omega, oc.gamma_bar, P_tot,
                      target.theta, target.f_D, target.profile[ns], [space_time_kernel(sub, n) for n in ns],
                      R_eta, scene.tx_array, scene.rx_array, sub_grid, ns)


def run_slp_stap(config, n_jobs=1, full_scale=False):
    """Symbol-level waveform and STAP filter design, with the K = 0 optimum for reference"""
    scene = resolve_scene(config, full_scale)
    oc = config.optimization
    target = _target(scene, config.pipeline.target)
    rng = scene.rng(4)
    problem = slp_problem(scene, target, oc, rng)
    design = slp_stap_optimize(problem, oc.starts, oc.max_outer, oc.tol, rng)
    radar = slp_stap_optimize(slp_problem(scene, target, oc, rng, K=0), oc.starts, oc.max_outer, oc.tol, rng)
    bundle = ArtifactBundle('slp_stap', config.seed, config.digest())
    bundle.add('trace', 'trace', design.trace_frame(), 'SLP-STAP Dinkelbach trace')
    bundle.summary.update({
        'K': problem.K,
        'scnr_db': design.scnr_db,
        'radar_only_scnr_db': radar.scnr_db,
        'min_margin': float(np.min(design.sinr)) if design.sinr.size else None,
        'gamma_bar': oc.gamma_bar,
        'converged': design.converged,
        'energy': float(np.sum(np.abs(design.X) ** 2)),
        'target': target.name,
    })
    return bundle


def run_optimize(config, n_jobs=1, full_scale=False):
    if config.optimization.problem == 'slp':
        return run_slp_stap(config, n_jobs, full_scale)
    return run_blp_tradeoff(config, n_jobs, full_scale)


RUNNERS = {
    'pipeline': run_pipeline,
    'optimize': run_optimize,
    'cold_only': run_cold_only,
    'mixed': run_mixed,
    'stap_compare': run_stap_compare,
    'blp_tradeoff': run_blp_tradeoff,
    'slp_stap': run_slp_stap,
}


def run_experiment(config, experiment=None, n_jobs=1, full_scale=False):
    """Dispatch to a runner; `experiment` defaults to the config's preset, then 'pipeline'"""
    experiment = experiment or config.preset or 'pipeline'
    if experiment not in RUNNERS:
        raise ConfigError(f'{experiment!r} is not one of {", ".join(EXPERIMENTS)}', 'preset')
    logging.info(f'Running {experiment} with seed {config.seed} (config {config.digest()})')
    return RUNNERS[experiment](config, n_jobs=n_jobs, full_scale=full_scale)
