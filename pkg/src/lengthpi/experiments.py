"""Monte-Carlo studies on the simulated heteroscedastic model.

Every study draws its randomness from :class:`~lengthpi.core.SeededRng`
streams keyed by the repetition index and the cell coordinates, so a
cell's numbers do not depend on which other cells are run alongside it
and reruns with the same seed write byte-identical CSV files.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .calibration import GCurve, build_g, build_h, g_inverse, h_threshold
from .core import SeededRng, UnlabeledDataset, make_grid
from .density import DEFAULT_U, CondDensityModel
from .estimators import KnnEstimator, default_k, s_practice, s_theory
from .metrics import empirical_error, empirical_length
from .predictor import CoveragePI, LengthPI, OraclePI, default_m, oracle_scores, predict_coverage, predict_length
from .synthetic import benchmark_model, sample

LONG_HEADER = ["experiment", "d", "ell_or_beta", "N", "rep", "metric", "value"]
SUMMARY_HEADER = ["experiment", "d", "ell_or_beta", "N", "metric", "mean", "sd", "reps", "seed"]
PLOT_HEADER = ["N", "method", "metric", "mean", "sd", "reps", "seed"]

COMPARE_SIZES = (10, 30, 50, 70, 100, 150, 200, 500, 1000)

# neighbour count for the plug-in reproductions; the n^(2/(d+2)) rule gives
# k=6 at n=500, d=5, which under-smooths the variance estimate
REPRO_K = 50


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    d: tuple = (1, 5)
    ell: tuple = (0.1, 0.5, 1.0, 2.0)
    beta: float | None = None
    n: int = 500
    N: tuple = (100,)
    M: int | None = None
    T: int = 1000
    reps: int = 100
    k: int | str = "auto"
    u: float = DEFAULT_U
    s_mode: str = "practice"
    seed: int = 0
    out: str | None = None
    # grid half-width used by the true-density runs
    oracle_s: float = 5.0
    # feature draws used to measure an expected length exactly enough
    n_eval: int = 100_000

    def validate(self) -> ExperimentConfig:
        def positive_ints(name, values):
            for v in values:
                if int(v) != v or v < 1:
                    raise ConfigError(f"{name} must contain positive integers, got {v!r}")

        positive_ints("d", self.d)
        positive_ints("N", self.N)
        positive_ints("n/T/reps", (self.n, self.T, self.reps, self.n_eval))
        if self.M is not None and (int(self.M) != self.M or self.M < 2):
            raise ConfigError(f"M must be an integer >= 2, got {self.M!r}")
        if any(not e > 0 for e in self.ell):
            raise ConfigError("ell values must be positive")
        if self.beta is not None and not 0 < self.beta < 1:
            raise ConfigError("beta must lie in (0, 1)")
        if self.k != "auto" and (int(self.k) != self.k or self.k < 1):
            raise ConfigError(f"k must be 'auto' or a positive integer, got {self.k!r}")
        if not self.u >= 0:
            raise ConfigError("u must be nonnegative")
        if self.s_mode not in ("theory", "practice"):
            raise ConfigError(f"s_mode must be 'theory' or 'practice', got {self.s_mode!r}")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if not self.oracle_s > 0:
            raise ConfigError("oracle_s must be positive")
        return self


def table1_config(**kw) -> ExperimentConfig:
    base = ExperimentConfig("table1", N=(1000,), M=1000, T=1000, reps=100)
    return replace(base, **kw).validate()


def table2_config(**kw) -> ExperimentConfig:
    base = ExperimentConfig("table2", n=500, N=(100,), M=100, T=1000, reps=100, k=REPRO_K)
    return replace(base, **kw).validate()


def compare_config(**kw) -> ExperimentConfig:
    base = ExperimentConfig(
        "compare", d=(5,), ell=(2.0,), beta=0.17, n=500, N=COMPARE_SIZES, T=1000, reps=20, k=REPRO_K
    )
    return replace(base, **kw).validate()


def length_scaling_config(**kw) -> ExperimentConfig:
    base = ExperimentConfig("length-scaling", d=(1,), ell=(1.0,), N=(25, 100, 400, 1600), reps=200)
    config = replace(base, **kw).validate()
    if list(config.N) != sorted(config.N):
        raise ConfigError("N values must be increasing")
    return config


@dataclass
class ExperimentReport:
    """Per-repetition rows in long format plus their aggregates."""

    config: ExperimentConfig
    rows: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def add(self, experiment, d, ell_or_beta, N, rep, metric, value):
        self.rows.append((experiment, int(d), float(ell_or_beta), int(N), int(rep), metric, float(value)))

    def values(self, experiment=None, d=None, ell_or_beta=None, N=None, metric=None) -> np.ndarray:
        """Per-repetition values matching every given coordinate, in repetition order."""
        want = dict(experiment=experiment, d=d, ell_or_beta=ell_or_beta, N=N, metric=metric)
        out = []
        for e, dd, eb, nn, _rep, m, v in self.rows:
            got = dict(experiment=e, d=dd, ell_or_beta=eb, N=nn, metric=m)
            if all(want[key] is None or _same(want[key], got[key]) for key in want):
                out.append(v)
        return np.array(out)

    def summary(self) -> list:
        """``(experiment, d, ell_or_beta, N, metric, mean, sd, reps, seed)`` per cell."""
        groups: dict = {}
        for e, d, eb, n, _rep, m, v in self.rows:
            groups.setdefault((e, d, eb, n, m), []).append(v)
        out = []
        for key, vals in groups.items():
            arr = np.array(vals)
            sd = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
            out.append(key + (float(np.mean(arr)), sd, arr.size, self.config.seed))
        return out

    def cell(self, **coords):
        """``(mean, sd)`` of one summary cell."""
        vals = self.values(**coords)
        if vals.size == 0:
            raise KeyError(f"no rows for {coords}")
        return float(np.mean(vals)), float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0

    def write_long(self, path) -> None:
        _write(path, LONG_HEADER, self.rows)

    def write_summary(self, path) -> None:
        _write(path, SUMMARY_HEADER, self.summary())

    def write_plot(self, path) -> None:
        """Plot-ready ``N,method,metric,mean,sd,reps,seed`` (comparison study)."""
        rows = []
        for e, _d, _eb, n, m, mean, sd, reps, seed in self.summary():
            method = e.split(".", 1)[1] if "." in e else e
            rows.append((n, method, m, mean, sd, reps, seed))
        _write(path, PLOT_HEADER, rows)


def _same(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return math.isclose(float(a), float(b), rel_tol=1e-12, abs_tol=1e-15)
    return a == b


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _ell_key(ell: float) -> int:
    return int(round(ell * 1e6))


def fit_density(train, config: ExperimentConfig, n_unlabeled: int) -> CondDensityModel:
    """kNN plug-in density with ``s`` chosen by ``config.s_mode``."""
    k = default_k(len(train), train.d) if config.k == "auto" else min(int(config.k), len(train))
    est = KnnEstimator(train, k)
    if config.s_mode == "practice":
        s = s_practice(train.labels)
    else:
        s = s_theory(len(train), n_unlabeled)
    return CondDensityModel.from_knn(est, s, config.u)


def _oracle_curve(model, features, grid) -> GCurve:
    scores = oracle_scores(model, features, grid)
    return GCurve(scores.ravel(), grid.s, grid.m, features.shape[0])


def run_oracle_table(d_list=None, ell_list=None, config: ExperimentConfig | None = None) -> ExperimentReport:
    """Length and error rate of the true-density interval for each ``(d, ell)``.

    Per repetition: draw ``N`` unlabeled features, estimate ``lambda*`` on an
    ``M``-point grid of ``[-oracle_s, oracle_s]``, then measure the clipped
    oracle interval on ``T`` fresh labeled points.
    """
    config = (config or table1_config()).validate()
    d_list = tuple(d_list or config.d)
    ell_list = tuple(ell_list or config.ell)
    N = config.N[0]
    grid = make_grid(config.oracle_s, config.M or default_m(N))
    report = ExperimentReport(replace(config, d=d_list, ell=ell_list))
    for d in d_list:
        model = benchmark_model(d)
        for rep in range(config.reps):
            rng = SeededRng(config.seed, (rep, d))
            g = _oracle_curve(model, model.sample_features(N, rng), grid)
            test = sample(model, config.T, rng)
            for ell in ell_list:
                oracle = OraclePI(model, g_inverse(g, ell), s=grid.s)
                iv = oracle.predict(test.features)
                report.add(config.experiment, d, ell, N, rep, "length", empirical_length(iv))
                report.add(config.experiment, d, ell, N, rep, "error", empirical_error(iv, test.labels))
    return report


def run_plugin_table(d_list=None, ell_list=None, config: ExperimentConfig | None = None) -> ExperimentReport:
    """Length and error rate of the kNN plug-in length-controlled interval.

    Per repetition: fit ``f_hat`` and ``sigma_hat^2`` on ``n`` labeled
    points, calibrate on ``N`` unlabeled points with an ``M``-point grid of
    ``[-s, s]``, and evaluate on ``T`` fresh labeled points.
    """
    config = (config or table2_config()).validate()
    d_list = tuple(d_list or config.d)
    ell_list = tuple(ell_list or config.ell)
    N = config.N[0]
    report = ExperimentReport(replace(config, d=d_list, ell=ell_list))
    for d in d_list:
        model = benchmark_model(d)
        for rep in range(config.reps):
            rng = SeededRng(config.seed, (rep, d))
            train = sample(model, config.n, rng)
            density = fit_density(train, config, N)
            unlabeled = UnlabeledDataset(model.sample_features(N, rng))
            grid = make_grid(density.s, config.M or default_m(N))
            g = build_g(density, unlabeled, grid, rng)
            test = sample(model, config.T, rng)
            for ell in ell_list:
                pi = LengthPI(density, g_inverse(g, ell), ell, d)
                iv = predict_length(pi, test.features, SeededRng(config.seed, (rep, d, _ell_key(ell))))
                report.add(config.experiment, d, ell, N, rep, "length", empirical_length(iv))
                report.add(config.experiment, d, ell, N, rep, "error", empirical_error(iv, test.labels))
    return report


def run_comparison(config: ExperimentConfig | None = None) -> ExperimentReport:
    """Length-calibrated versus coverage-calibrated intervals as the calibration size grows.

    For each repetition one training set of size ``n`` and one test set of
    size ``T`` are shared by both methods.  For every calibration size ``N``
    the length method gets ``N`` fresh unlabeled points and the coverage
    method ``N`` fresh labeled points, disjoint from the training data.
    """
    config = (config or compare_config()).validate()
    if config.beta is None:
        raise ConfigError("the comparison needs beta")
    d, ell, beta = config.d[0], config.ell[0], config.beta
    model = benchmark_model(d)
    report = ExperimentReport(config)
    for rep in range(config.reps):
        rng = SeededRng(config.seed, (rep,))
        train = sample(model, config.n, rng)
        test = sample(model, config.T, rng)
        for N in config.N:
            sub = SeededRng(config.seed, (rep, N))
            density = fit_density(train, config, N)
            unlabeled = UnlabeledDataset(model.sample_features(N, sub))
            calset = sample(model, N, sub)
            grid = make_grid(density.s, config.M or default_m(N))
            length_pi = LengthPI(density, g_inverse(build_g(density, unlabeled, grid, sub), ell), ell, d)
            cover_pi = CoveragePI(density, h_threshold(build_h(density, calset, sub), beta), beta, d)
            for method, pi, predict in (
                ("length_pi", length_pi, predict_length),
                ("coverage_pi", cover_pi, predict_coverage),
            ):
                iv = predict(pi, test.features, sub)
                err = empirical_error(iv, test.labels)
                exp = f"{config.experiment}.{method}"
                target = ell if method == "length_pi" else beta
                report.add(exp, d, target, N, rep, "length", empirical_length(iv))
                report.add(exp, d, target, N, rep, "coverage", 1.0 - err)
    return report


def expected_length(pi: OraclePI, n_eval: int, rng: SeededRng) -> float:
    """Monte-Carlo ``E[L(Gamma(X))]`` over ``n_eval`` fresh feature draws."""
    X = pi.model.sample_features(n_eval, rng)
    return empirical_length(pi.predict(X))


def run_length_scaling(N_list=None, config: ExperimentConfig | None = None) -> ExperimentReport:
    """Mean ``|L(Gamma_hat) - ell|`` against the calibration size, true densities.

    Each repetition estimates the threshold from ``N`` unlabeled points and
    measures the resulting expected length on ``n_eval`` fresh features.
    The fitted log-log slope of the mean gap against ``N`` is stored in
    ``report.extra``.
    """
    config = (config or length_scaling_config()).validate()
    N_list = tuple(N_list or config.N)
    if list(N_list) != sorted(N_list):
        raise ConfigError("N values must be increasing")
    d, ell = config.d[0], config.ell[0]
    model = benchmark_model(d)
    report = ExperimentReport(replace(config, N=N_list))
    for N in N_list:
        grid = make_grid(config.oracle_s, config.M or default_m(N))
        for rep in range(config.reps):
            rng = SeededRng(config.seed, (rep, N))
            g = _oracle_curve(model, model.sample_features(N, rng), grid)
            pi = OraclePI(model, g_inverse(g, ell), s=grid.s)
            gap = abs(expected_length(pi, config.n_eval, rng) - ell)
            report.add(config.experiment, d, ell, N, rep, "abs_length_gap", gap)
    means = np.array([report.cell(N=N, metric="abs_length_gap")[0] for N in N_list])
    if len(N_list) >= 2:
        slope, se = loglog_slope(N_list, means)
        report.extra.update(slope=slope, slope_se=se)
    return report


def loglog_slope(xs, ys):
    """Least-squares slope of ``log y`` on ``log x`` and its standard error."""
    lx, ly = np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    dof = lx.size - 2
    if dof > 0:
        resid = ly - A @ coef
        sigma2 = float(resid @ resid) / dof
        se = math.sqrt(sigma2 / float(((lx - lx.mean()) ** 2).sum()))
    else:
        se = 0.0
    return float(coef[0]), se
