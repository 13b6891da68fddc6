import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from lengthpi.calibration import (
    GCurve,
    HCurve,
    build_g,
    build_h,
    g_eval,
    g_inverse,
    h_eval,
    h_threshold,
)
from lengthpi.core import LabeledDataset, SeededRng, UnlabeledDataset, make_grid
from lengthpi.density import CondDensityModel
from lengthpi.predictor import oracle_scores
from lengthpi.synthetic import benchmark_model

FOUR = [0.1, 0.2, 0.3, 0.4]


def four_curve():
    # s=1, M*N=4 -> cell mass 0.5
    return GCurve(FOUR, s=1.0, m=2, n_unlabeled=2)


def feature_model(s, u, var=0.5):
    # mean is the first feature, so each unlabeled point sets its own centre;
    # with s=1 the clamp pins the variance to 1
    return CondDensityModel(lambda X: X[:, 0].copy(), lambda X: np.full(len(X), var), s, u)


def test_g_eval_hand_counts():
    g = four_curve()
    assert g.cell_mass == 0.5
    assert g_eval(g, 0.25) == 1.0
    assert g_eval(g, 0.35) == 0.5
    assert g_eval(g, 0.0) == 2.0
    assert g_eval(g, 0.4) == 0.0
    assert g_eval(g, 1.0) == 0.0
    np.testing.assert_array_equal(g_eval(g, np.array([0.05, 0.15])), [2.0, 1.5])


def test_g_inverse_hand_enumeration():
    g = four_curve()
    assert g_inverse(g, 1.0) == 0.2
    assert g_eval(g, 0.2) == 1.0
    assert g_inverse(g, 0.9) == 0.3
    assert g_eval(g, 0.3) == 0.5 and g_eval(g, 0.29) == 1.0


def test_g_inverse_whole_support():
    g = four_curve()
    assert g_inverse(g, 2.0) == 0.0
    with pytest.warns(UserWarning):
        assert g_inverse(g, 3.0) == 0.0
    with pytest.raises(ValueError):
        g_inverse(g, 0.0)


def test_build_g_single_step():
    # grid of [-1, 1] with M=2 is {-1, 0}; a centre of -0.5 is equidistant
    grid = make_grid(1.0, 2)
    model = feature_model(1.0, 0.0)
    g = build_g(model, UnlabeledDataset([[-0.5]]), grid, SeededRng(0))
    c = norm.pdf(0.5)
    np.testing.assert_allclose(g.scores, [c, c], rtol=1e-14)
    assert g_eval(g, c * 0.999) == 2.0 and g_eval(g, c) == 0.0


def test_build_g_randomized_and_unperturbed():
    grid = make_grid(1.0, 2)
    X = UnlabeledDataset([[-0.9], [0.3]])
    plain = build_g(feature_model(1.0, 0.0), X, grid, SeededRng(0))
    expected = sorted(
        [norm.pdf(y, loc=x) for x in (-0.9, 0.3) for y in (-1.0, 0.0)], reverse=True
    )
    np.testing.assert_allclose(plain.scores, expected, rtol=1e-14)
    t = 0.5 * (expected[1] + expected[2])
    # 2s/(MN) = 0.5 per score above t
    assert g_eval(plain, t) == 1.0
    rand = build_g(feature_model(1.0, 0.01), X, grid, SeededRng(0))
    assert np.all(rand.scores > 0)
    assert np.all(rand.scores - np.sort(plain.scores)[::-1] <= 0.01)
    assert g_eval(rand, 0.0) == 2.0


def test_build_g_checks_support():
    with pytest.raises(ValueError):
        build_g(feature_model(1.0, 0.0), UnlabeledDataset([[0.0]]), make_grid(2.0, 4), SeededRng(0))


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(1e-6, 5.0), min_size=1, max_size=60),
    st.floats(0.1, 5.0),
    st.lists(st.floats(1e-4, 1.0), min_size=1, max_size=10),
)
def test_generalized_inverse_contract(scores, s, fracs):
    g = GCurve(scores, s=s, m=len(scores), n_unlabeled=1)
    prev = np.inf
    for ell in sorted(f * 2 * s for f in fracs):
        t = g_inverse(g, ell)
        assert g_eval(g, t) <= ell
        if t > 0:
            assert g_eval(g, t * (1 - 1e-9)) > ell
        assert t <= prev
        prev = t


@given(st.lists(st.floats(0, 3), min_size=1, max_size=50))
def test_g_eval_monotone(scores):
    g = GCurve(np.array(scores) + 1e-3, s=1.0, m=len(scores), n_unlabeled=1)
    ts = np.linspace(0, 4, 101)
    vals = g_eval(g, ts)
    assert np.all(np.diff(vals) <= 0)
    assert vals[0] == pytest.approx(2.0)
    assert len(np.unique(vals)) <= len(scores) + 1


def test_h_curve_hand_counts():
    h = HCurve(FOUR)
    assert h.k_cal == 4
    assert h_eval(h, 0.25) == 0.5
    assert h_eval(h, 0.1) == 1.0
    assert h_threshold(h, 0.25) == 0.1
    # the infimum is a right limit under the >= indicator
    assert h_eval(h, 0.1 + 1e-12) == 0.75


def test_h_threshold_limits():
    h = HCurve(FOUR)
    assert h_threshold(h, 0.999) == 0.4
    assert h_threshold(h, 0.001) == 0.1
    single = HCurve([0.7])
    assert h_eval(single, 0.5) == 1.0 and h_eval(single, 0.8) == 0.0
    with pytest.raises(ValueError):
        h_threshold(h, 1.0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(1e-6, 5.0), min_size=1, max_size=80), st.floats(0.01, 0.99))
def test_h_threshold_contract(scores, beta):
    h = HCurve(scores)
    t = h_threshold(h, beta)
    assert h_eval(h, np.nextafter(t, np.inf)) <= 1 - beta + 1e-12
    if t > 0:
        assert h_eval(h, t) > 1 - beta
    assert h_threshold(h, min(0.995, beta + 0.1)) >= t


def test_build_h_scores():
    model = feature_model(2.0, 0.0)
    cal = LabeledDataset([[0.0], [1.0], [0.5]], [0.2, 3.0, -0.5])
    h = build_h(model, cal, SeededRng(0))
    expected = sorted(
        [norm.pdf(0.2, 0.0, np.sqrt(0.5)), 0.0, norm.pdf(-0.5, 0.5, np.sqrt(0.5))], reverse=True
    )
    np.testing.assert_allclose(h.scores, expected, rtol=1e-14)


def test_build_h_outside_support_is_zero():
    model = feature_model(1.0, 0.0)
    cal = LabeledDataset([[0.0], [0.0]], [2.0, -3.0])
    np.testing.assert_array_equal(build_h(model, cal, SeededRng(0)).scores, 0.0)


def test_markov_bound_on_true_curve():
    model = benchmark_model(1)
    grid = make_grid(5.0, 2000)
    X = model.sample_features(500, SeededRng(4))
    g = GCurve(oracle_scores(model, X, grid).ravel(), grid.s, grid.m, 500)
    for t in (0.1, 0.2, 0.5):
        assert g_eval(g, t) <= 1.05 / t


def test_curve_csv(tmp_path):
    four_curve().to_csv(tmp_path / "g.csv")
    lines = (tmp_path / "g.csv").read_text().splitlines()
    assert lines[0] == "score"
    assert [float(v) for v in lines[1:]] == [0.4, 0.3, 0.2, 0.1]
