import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import ndtr

from lengthpi.core import SeededRng
from lengthpi.density import (
    CondDensityModel,
    Perturbation,
    density_bound,
    l1_density_distance,
    p_hat,
    p_hat_randomized,
)
from lengthpi.synthetic import homoscedastic_model, benchmark_model


def const_model(mean, var, s=5.0, u=1e-5):
    return CondDensityModel(
        lambda X: np.full(len(X), float(mean)), lambda X: np.full(len(X), float(var)), s, u
    )


def test_outside_support_is_zero():
    m = const_model(0.0, 1.0, s=2.0)
    assert p_hat(m, [0.0], 2.5) == 0.0
    assert p_hat(m, [0.0], -2.0001) == 0.0
    assert p_hat_randomized(m, [0.0], 3.0, Perturbation(0.5)) == 0.0


def test_mode_value():
    assert p_hat(const_model(0.3, 1.0), [0.0], 0.3) == pytest.approx(1 / math.sqrt(2 * math.pi))


def test_plugin_gaussian_value():
    # N(1, 0.25) at 0
    assert p_hat(const_model(1.0, 0.25), [0.0], 0.0) == pytest.approx(0.10798193302637613, rel=1e-14)


def test_variance_is_clamped():
    m = const_model(0.0, 1e-6, s=4.0)
    # clamped to 1/4 -> sd 0.5
    assert p_hat(m, [0.0], 0.0) == pytest.approx(1 / (math.sqrt(2 * math.pi) * 0.5))
    assert p_hat(m, [0.0], 0.0) <= density_bound(4.0) + 1e-15


def test_randomized_shift():
    m = const_model(0.0, 1.0)
    assert p_hat_randomized(m, [0.0], 0.7, Perturbation(0.0)) == p_hat(m, [0.0], 0.7)
    base = p_hat(m, [0.0], 0.7)
    assert p_hat_randomized(m, [0.0], 0.7, Perturbation(1e-5)) == pytest.approx(base + 1e-5, abs=1e-17)
    ys = np.linspace(-6, 6, 97)
    X = np.zeros((ys.size, 1))
    diff = p_hat_randomized(m, X, ys, 0.03) - p_hat(m, X, ys)
    inside = np.abs(ys) <= m.s
    np.testing.assert_allclose(diff[inside], 0.03, atol=1e-15)
    np.testing.assert_array_equal(diff[~inside], 0.0)


def test_perturbation_validation():
    with pytest.raises(ValueError):
        Perturbation(-0.1)
    with pytest.raises(ValueError):
        CondDensityModel(lambda X: X[:, 0], lambda X: X[:, 0], s=0.0)


@pytest.mark.parametrize("mean,var,s", [(0.0, 1.0, 5.0), (4.0, 1.0, 5.0), (0.5, 0.05, 3.0), (2.0, 9.0, 6.0)])
def test_integral_at_most_one_and_unimodal(mean, var, s):
    m = const_model(mean, var, s=s)
    val, _ = integrate.quad(lambda y: p_hat(m, [0.0], y), -s, s, points=[mean], limit=200)
    assert val <= 1.0 + 1e-9
    ys = np.linspace(-s, s, 4001)
    dens = p_hat(m, np.zeros((ys.size, 1)), ys)
    peak = int(np.argmax(dens))
    assert np.all(np.diff(dens[: peak + 1]) >= 0)
    assert np.all(np.diff(dens[peak:]) <= 0)
    assert dens.max() <= density_bound(s) + 1e-12


def test_l1_identical_is_zero():
    truth = benchmark_model(1)
    model = CondDensityModel(truth.mean, lambda X: truth.scale(X) ** 2, s=40.0)
    xs = truth.sample_features(20, SeededRng(0))
    assert l1_density_distance(model, truth, xs, quad_points=20001) < 1e-3


@pytest.mark.parametrize("delta,expected", [(0.3, 0.23847076948097), (1.0, 0.7658498450960525)])
def test_l1_shifted_mean(delta, expected):
    truth = homoscedastic_model(1, sd=1.0)
    model = CondDensityModel(lambda X: truth.mean(X) + delta, lambda X: np.ones(len(X)), s=12.0)
    xs = truth.sample_features(5, SeededRng(1))
    assert l1_density_distance(model, truth, xs, quad_points=20001) == pytest.approx(expected, abs=1e-5)


def test_l1_tail_only():
    truth = homoscedastic_model(1, sd=1.0)
    shift = lambda X: np.zeros(len(X))  # noqa: E731
    model = CondDensityModel(shift, lambda X: np.ones(len(X)), s=1.0)
    zero_mean = type(truth)(shift, truth.sigma, 1, truth.feature_sampler)
    xs = truth.sample_features(3, SeededRng(2))
    expected = 2 * (1 - ndtr(1.0))
    assert expected == pytest.approx(0.31731050786291415)
    assert l1_density_distance(model, zero_mean, xs, quad_points=20001) == pytest.approx(expected, abs=1e-6)
