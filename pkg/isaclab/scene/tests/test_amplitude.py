import numpy as np
import pytest
from scipy import stats

from isaclab.scene.amplitude import AmplitudeModel, mean_power, sample_clutter_gain, sample_sirv

DRAWS = 100000


def test_gaussian_zero_power(rng):
    g = sample_clutter_gain(AmplitudeModel('gaussian', {'power': 0.0}), rng)
    assert g == 0


@pytest.mark.parametrize(
    'kind, params',
    [
        ['gaussian', {'power': 2.5}],
        ['rayleigh', {'sigma_r': 1.0}],
        ['rayleigh', {'sigma_r': 0.3}],
        ['lognormal', {'mu': -0.2, 'sigma': 0.25}],
        ['weibull', {'k': 2.5, 'lam': 1.5}],
        ['weibull', {'k': 1.2, 'lam': 0.7}],
        ['k_dist', {'nu': 2.0, 'b': 2.0}],
        ['k_dist', {'nu': 0.8, 'b': 1.0}],
    ]
)
def test_second_moment(rng, kind, params):
    """Empirical E{r^2} within 3 standard errors of the closed form"""
    model = AmplitudeModel(kind, params)
    r2 = np.abs(sample_clutter_gain(model, rng, DRAWS)) ** 2
    se = r2.std() / np.sqrt(DRAWS)
    assert abs(r2.mean() - mean_power(model)) <= 3 * se


def test_rayleigh_moment_closed_form():
    assert mean_power(AmplitudeModel('rayleigh', {'sigma_r': 1.0})) == 2.0


def test_phase_uniform(rng):
    g = sample_clutter_gain(AmplitudeModel('weibull', {'k': 2.0, 'lam': 1.0}), rng, DRAWS)
    phase = np.mod(np.angle(g), 2 * np.pi) / (2 * np.pi)
    assert stats.kstest(phase, 'uniform').pvalue > 0.01


def test_gains_finite(rng):
    for kind, params in [['lognormal', {'mu': 0.0, 'sigma': 1.0}], ['k_dist', {'nu': 0.5, 'b': 1.0}]]:
        g = sample_clutter_gain(AmplitudeModel(kind, params), rng, 1000)
        assert np.all(np.isfinite(g))


def test_sirv_constant_texture_matches_gaussian(rng):
    sirv = AmplitudeModel('sirv', {'texture': 'constant', 'shape': np.eye(2)})
    snapshots = sample_sirv(sirv, 20000, rng)
    gauss = sample_clutter_gain(AmplitudeModel('gaussian', {'power': 1.0}), rng, 20000)
    assert stats.ks_2samp(np.abs(snapshots[0]), np.abs(gauss)).pvalue > 0.01


def test_sirv_shape_normalised():
    model = AmplitudeModel('sirv', {'texture': 'gamma', 'nu': 2.0, 'shape': 5 * np.eye(4)})
    assert np.trace(model.params['shape']).real == pytest.approx(4.0, abs=1e-12)
    assert model.dim == 4


def test_sirv_covariance(rng):
    shape = np.array([[1.0, 0.5j], [-0.5j, 1.0]])
    model = AmplitudeModel('sirv', {'texture': 'gamma', 'nu': 4.0, 'shape': shape})
    x = sample_sirv(model, DRAWS, rng)
    R = x @ x.conj().T / DRAWS
    assert np.abs(R - shape).max() < 0.05


def test_sirv_gain_is_snapshot(rng):
    model = AmplitudeModel('sirv', {'texture': 'inverse_gamma', 'nu': 3.0, 'shape': np.eye(3)})
    assert sample_clutter_gain(model, rng).shape == (3,)


@pytest.mark.parametrize(
    'kind, params',
    [
        ['rayleigh', {'sigma_r': 0.0}],
        ['weibull', {'k': -1.0, 'lam': 1.0}],
        ['k_dist', {'nu': 1.0}],
        ['gaussian', {'power': -1.0}],
        ['sirv', {'texture': 'beta', 'shape': np.eye(2)}],
        ['rice', {}],
    ]
)
def test_invalid_model(kind, params):
    with pytest.raises(ValueError):
        AmplitudeModel(kind, params)
