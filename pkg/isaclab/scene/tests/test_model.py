import logging

import numpy as np
import pytest

from isaclab.constants import Constants
from isaclab.errors import ConfigError
from isaclab.scene.model import (ClutterConfig, HotPathConfig, NoiseConfig, ObjectConfig,
                                 SceneConfig, build_scene, clutter_rings, scale_clutter_to_scnr)
from isaclab.units import doppler_from_velocity

REFERENCE = Constants.REFERENCE


def _reference_config(**kwargs):
    objects = [ObjectConfig(az, r, v, name=name)
               for name, (az, r, v) in Constants.REFERENCE_OBJECTS.items() if name != 'emitter']
    return SceneConfig(f0=REFERENCE['f0'], delta_f=REFERENCE['delta_f'], N=REFERENCE['N'], L=REFERENCE['L'],
                       N_t=REFERENCE['N_t'], N_r=REFERENCE['N_r'], objects=objects, **kwargs)


def test_build_scene_reference():
    scene = build_scene(_reference_config())
    assert scene.grid.f0 == 28e9
    assert scene.grid.delta_f == 120e3
    assert (scene.grid.N, scene.grid.L) == (512, 256)
    assert (scene.N_t, scene.N_r) == (16, 16)
    toi = scene.targets[0]
    assert toi.name == 'toi'
    assert toi.theta == pytest.approx(np.deg2rad(-10.0), abs=1e-12)
    assert toi.tau == pytest.approx(2 * 41.8 / Constants.C0, rel=1e-12)
    assert toi.f_D == pytest.approx(-5828.0, abs=1.0)
    assert toi.profile.shape == (512,)


def test_build_scene_empty():
    scene = build_scene(SceneConfig())
    assert scene.scatterers == [] and scene.hot_paths == []
    assert scene.noise.kind == 'white'


def test_build_scene_clutter_rings():
    config = _reference_config(clutter=ClutterConfig(count=100, power=0.1))
    scene = build_scene(config)
    clutter = scene.clutter
    assert len(clutter) == 100
    assert all(s.role == 'cold_clutter' for s in clutter)
    assert len({round(s.tau, 15) for s in clutter}) == 4
    theta = np.array([s.theta for s in clutter])
    assert np.all(np.abs(theta) <= np.pi / 2)
    v_max = doppler_from_velocity(1.0, 28e9)
    assert all(abs(s.f_D) <= v_max for s in clutter)


def test_build_scene_deterministic():
    config = _reference_config(clutter=ClutterConfig(count=20), seed=7)
    a, b = build_scene(config), build_scene(config)
    assert [s.theta for s in a.scatterers] == [s.theta for s in b.scatterers]
    assert a.digest() == b.digest()


def test_build_scene_default_cp():
    scene = build_scene(SceneConfig(T_cp=None))
    assert scene.grid.T_cp == pytest.approx(1 / (14 * 120e3), rel=1e-12)


def test_build_scene_negative_power():
    with pytest.raises(ConfigError, match=r'scene.objects\[0\].power'):
        build_scene(SceneConfig(objects=[ObjectConfig(0.0, 10.0, power=-1.0)]))


def test_build_scene_delay_beyond_cp_warns(caplog):
    config = SceneConfig(objects=[ObjectConfig(0.0, 500.0)])
    with caplog.at_level(logging.WARNING):
        build_scene(config)
    assert 'cyclic prefix' in caplog.text


def test_build_scene_delay_beyond_cp_strict():
    with pytest.raises(ConfigError):
        build_scene(SceneConfig(objects=[ObjectConfig(0.0, 500.0)], strict=True))


def test_build_scene_hot_path_one_way():
    scene = build_scene(SceneConfig(hot_paths=[HotPathConfig(-74.5, 122.4, power=10.0)]))
    assert scene.hot_paths[0].tau == pytest.approx(122.4 / Constants.C0, rel=1e-12)
    assert scene.n_emitters == 1


def test_build_scene_colored_noise():
    scene = build_scene(SceneConfig(noise=NoiseConfig(kind='colored', sigma2=2.0, rho=0.5)))
    R = scene.noise.covariance(0, scene.N_r)
    assert R[0, 1] == pytest.approx(1.0)
    assert scene.noise.power(scene.N_r) == pytest.approx(2.0)


def test_clutter_rings_bracket_range(desk_grid, rng):
    rings = clutter_rings(8, 40.0, 5.0, 1.0, desk_grid, rng)
    ranges = sorted({round(s.tau * Constants.C0 / 2, 9) for s in rings})
    assert ranges == pytest.approx([30.0, 35.0, 45.0, 50.0])


def test_clutter_rings_negative_radius(desk_grid, rng):
    with pytest.raises(ValueError):
        clutter_rings(8, 5.0, 5.0, 1.0, desk_grid, rng)


def test_scale_clutter_to_scnr():
    config = SceneConfig(objects=[ObjectConfig(-10.0, 41.8, -31.2, power=1.0)],
                         clutter=ClutterConfig(count=40, power=1.0),
                         noise=NoiseConfig(sigma2=1e-3))
    scene = scale_clutter_to_scnr(build_scene(config), -45.0)
    interference = sum(s.power for s in scene.clutter) + 1e-3
    assert 10 * np.log10(1.0 / interference) == pytest.approx(-45.0, abs=1e-9)
    assert scene.clutter[0].profile[0] == pytest.approx(scene.clutter[0].power)


def test_scale_clutter_unreachable():
    config = SceneConfig(objects=[ObjectConfig(-10.0, 41.8, power=1.0)],
                         clutter=ClutterConfig(count=4), noise=NoiseConfig(sigma2=10.0))
    with pytest.raises(ValueError):
        scale_clutter_to_scnr(build_scene(config), 0.0)


def test_scene_rng_streams_differ():
    scene = build_scene(SceneConfig(seed=3))
    assert scene.rng(1).random() != scene.rng(2).random()
    assert scene.rng(1).random() == scene.rng(1).random()
