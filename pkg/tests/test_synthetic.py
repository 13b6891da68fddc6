import math

import numpy as np
import pytest
from scipy import integrate

from lengthpi.core import SeededRng, UnlabeledDataset
from lengthpi.synthetic import (
    GaussianModel,
    homoscedastic_model,
    oracle_density,
    benchmark_model,
    read_csv,
    sample,
    uniform_cube,
    write_csv,
)


@pytest.mark.parametrize(
    "d,x,f,sigma",
    [
        (1, [0.0], 1.0, 0.5),
        (5, [0.0] * 5, 1.0, 2.5),
        (1, [1.0], 0.36787944117144233, 0.16666666666666666),
    ],
)
def test_benchmark_model_values(d, x, f, sigma):
    m = benchmark_model(d)
    X = np.array([x])
    assert m.mean(X)[0] == pytest.approx(f, rel=1e-15)
    assert m.scale(X)[0] == pytest.approx(sigma, rel=1e-15)


def test_sigma_must_be_positive():
    bad = GaussianModel(lambda X: X[:, 0], lambda X: np.zeros(len(X)), 1, uniform_cube(1))
    with pytest.raises(ValueError):
        sample(bad, 5, SeededRng(0))


def test_sample_deterministic():
    m = benchmark_model(2)
    a, b = sample(m, 3, SeededRng(11)), sample(m, 3, SeededRng(11))
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_sample_noise_is_centered():
    m = benchmark_model(1)
    n = 100_000
    data = sample(m, n, SeededRng(5))
    resid = data.labels - m.mean(data.features)
    sigma1 = 0.5
    assert abs(resid.mean()) < 3 * sigma1 / math.sqrt(n)
    assert np.all(data.features >= 0) and np.all(data.features <= 1)


def test_oracle_density_values():
    m = homoscedastic_model(1, sd=1.0)
    x = np.array([0.3])
    assert oracle_density(m, x, 0.3) == pytest.approx(0.3989422804014327, rel=1e-14)
    assert oracle_density(m, x, 1.3) == pytest.approx(0.24197072451914337, rel=1e-14)
    # N(1, 0.25) at 0
    assert oracle_density(benchmark_model(1), [0.0], 0.0) == pytest.approx(0.10798193302637613, rel=1e-14)


@pytest.mark.parametrize("d", [1, 5])
def test_oracle_density_integrates_to_one(d):
    m = benchmark_model(d)
    X = m.sample_features(5, SeededRng(2))
    f, sd = m.mean(X), m.scale(X)
    for i in range(5):
        val, _ = integrate.quad(lambda y: oracle_density(m, X[i], y), f[i] - 10 * sd[i], f[i] + 10 * sd[i])
        assert val == pytest.approx(1.0, abs=1e-6)
        ys = np.linspace(f[i] - 3 * sd[i], f[i] + 3 * sd[i], 6001)
        dens = oracle_density(m, np.repeat(X[i : i + 1], ys.size, axis=0), ys)
        assert abs(ys[np.argmax(dens)] - f[i]) <= ys[1] - ys[0]


@pytest.mark.parametrize("d", [1, 5])
def test_labels_mostly_in_benchmark_range(d):
    y = sample(benchmark_model(d), 10_000, SeededRng(3)).labels
    assert np.mean(np.abs(y) > 5) < 0.01


def test_csv_roundtrip(tmp_path):
    data = sample(benchmark_model(3), 20, SeededRng(0))
    path = tmp_path / "data.csv"
    write_csv(path, data)
    header = path.read_text().splitlines()[0]
    assert header == "x1,x2,x3,y"
    back = read_csv(path)
    np.testing.assert_array_equal(back.features, data.features)
    np.testing.assert_array_equal(back.labels, data.labels)
    write_csv(tmp_path / "u.csv", UnlabeledDataset(data.features))
    assert isinstance(read_csv(tmp_path / "u.csv"), UnlabeledDataset)
