import numpy as np
import pytest

from isaclab.channel.arrays import ArrayGeometry
from isaclab.channel.steering import space_time_steering, temporal_steering
from isaclab.channel.synthesis import DataCube, stack_snapshots, synthesize_cube, unstack_snapshots
from isaclab.scene.amplitude import AmplitudeModel
from isaclab.scene.grid import OfdmGrid
from isaclab.scene.model import FrequencyModel, HotPath, NoiseSpec, Scatterer, Scene
from isaclab.waveform.precoding import TransmitRecord

from .conftest import unit_target


def test_noise_only_variance(rng):
    grid = OfdmGrid(28e9, 120e3, 64, 64)
    scene = Scene(grid, ArrayGeometry.ula(1, grid.f0), ArrayGeometry.ula(16, grid.f0),
                  noise=NoiseSpec('white', 1.0))
    cube = synthesize_cube(scene, TransmitRecord(np.ones((64, 64, 1))), rng)
    assert abs(np.mean(np.abs(cube.y) ** 2) - 1.0) <= 0.02


def test_single_target_reconstruction(scene_factory, single_stream, rng):
    target = unit_target()
    scene = scene_factory([target])
    cube = synthesize_cube(scene, single_stream, rng)
    grid = scene.grid
    t = temporal_steering('delay', target.tau, grid)
    for n in range(grid.N):
        v = space_time_steering(target.theta, target.theta, target.f_D, n,
                                scene.tx_array, scene.rx_array, grid)
        expected = t[n] * single_stream.apply_n(n, v, scene.N_r)
        assert np.abs(cube.snapshot(n) - expected).max() <= 1e-12


def test_zero_power_hot_path(scene_factory, single_stream, rng):
    scene = scene_factory(hot_paths=[HotPath(0.4, 2e-7, 0.0, 0.0)])
    cube = synthesize_cube(scene, single_stream, rng, keep_components=True)
    assert not np.any(cube.components['hot'])


def test_components_sum(scene_factory, single_stream, rng):
    clutter = Scatterer('cold_clutter', -0.5, 1.5e-7, 10.0, 2.0,
                        AmplitudeModel('weibull', {'k': 1.5, 'lam': 1.0}))
    scene = scene_factory([unit_target(), clutter], [HotPath(0.4, 2e-7, 50.0, 3.0, cooperative=True)],
                          sigma2=0.1)
    cube = synthesize_cube(scene, single_stream, rng, keep_components=True)
    total = sum(cube.components.values())
    assert np.abs(total - cube.y).max() <= 1e-12
    assert cube.metadata['emitter_symbols'][0].shape == (8, 6)


def test_synthesis_linearity(scene_factory, single_stream):
    a = unit_target(0.1, 1e-7, 2000.0)
    b = Scatterer('cold_clutter', -0.4, 2e-7, 5.0, 1.0, gain=0.3 - 0.2j)
    cube_ab = synthesize_cube(scene_factory([a, b]), single_stream, np.random.default_rng(0))
    cube_a = synthesize_cube(scene_factory([a]), single_stream, np.random.default_rng(0))
    cube_b = synthesize_cube(scene_factory([b], sigma2=0.0), single_stream, np.random.default_rng(0))
    assert np.abs(cube_ab.y - cube_a.y - cube_b.y).max() <= 1e-12


def test_muted_transmitter(scene_factory, single_stream, rng):
    scene = scene_factory([unit_target()], [HotPath(0.4, 2e-7, 0.0, 1.0)], mute_transmitter=True)
    cube = synthesize_cube(scene, single_stream, rng, keep_components=True)
    assert not np.any(cube.components['target'])
    assert np.any(cube.components['hot'])


def test_per_symbol_fading_varies(scene_factory, single_stream, rng):
    clutter = Scatterer('cold_clutter', 0.0, 1e-7, 0.0, 1.0)
    scene = scene_factory([clutter], fading='per_symbol')
    cube = synthesize_cube(scene, single_stream, rng)
    ratio = cube.y[0, 0, :] / single_stream.x[0, :, 0]
    assert np.std(np.abs(ratio)) > 0


def test_frequency_coloured_gains(scene_factory, single_stream, rng):
    clutter = Scatterer('cold_clutter', 0.0, 0.0, 0.0, 1.0)
    scene = scene_factory([clutter], freq_model=FrequencyModel(10e3))
    cube = synthesize_cube(scene, single_stream, rng)
    ratio = cube.y[0, :, 0] / single_stream.x[:, 0, 0]
    assert not np.allclose(ratio, ratio[0])


def test_grid_mismatch(scene_factory, rng):
    with pytest.raises(ValueError):
        synthesize_cube(scene_factory(), TransmitRecord(np.ones((4, 6, 1))), rng)


def test_deterministic(scene_factory, single_stream):
    scene = scene_factory([Scatterer('cold_clutter', 0.3, 1e-7, 1.0, 1.0)], sigma2=1.0, seed=5)
    assert np.array_equal(synthesize_cube(scene, single_stream).y,
                          synthesize_cube(scene, single_stream).y)


def test_stack_round_trip(rng):
    y = rng.standard_normal((3, 4, 5)) + 1j * rng.standard_normal((3, 4, 5))
    per_n = stack_snapshots(y, 'per_subcarrier')
    full = stack_snapshots(y, 'full_band')
    assert np.array_equal(unstack_snapshots(per_n, 3, 5), y)
    assert np.array_equal(unstack_snapshots(full, 3, 5), y)
    assert per_n[2, 1 + 3 * 4] == y[1, 2, 4]
    assert np.linalg.norm(full) ** 2 == pytest.approx(np.sum(np.linalg.norm(per_n, axis=1) ** 2))


def test_stack_bad_mode(rng):
    with pytest.raises(ValueError):
        stack_snapshots(np.zeros((2, 2, 2)), 'per_symbol')


def test_cube_rejects_non_finite(grid):
    with pytest.raises(ValueError):
        DataCube(np.full((2, 2, 2), np.nan), grid)
