"""Prediction intervals as superlevel sets of a Gaussian density.

Three predictors share one extraction rule:

* :class:`LengthPI` thresholds the randomized plug-in density at
  ``G_hat^{-1}(ell)`` so that the expected length is ``ell``;
* :class:`CoveragePI` thresholds it at ``t_beta`` so that the error rate
  is ``beta``;
* :class:`OraclePI` thresholds the true density at ``G^{-1}(ell)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .calibration import GCurve, build_g, build_h, g_inverse, grid_scores, h_threshold
from .core import Grid, Intervals, LabeledDataset, PredictionInterval, SeededRng, UnlabeledDataset, make_grid
from .density import CondDensityModel
from .synthetic import GaussianModel

SQRT_2PI = math.sqrt(2.0 * math.pi)


def default_m(n_unlabeled: int) -> int:
    """Grid size ``max(1000, ceil(4 sqrt(N)) + 1)``, which keeps ``M > 4 sqrt(N)``."""
    return max(1000, math.ceil(4.0 * math.sqrt(n_unlabeled)) + 1)


def superlevel_bounds(mean, variance, threshold, s=math.inf) -> Intervals:
    """Vectorised ``{y : N(y; mean, variance) >= threshold} ∩ [-s, s]``.

    A nonpositive threshold yields the whole support ``[-s, s]``.
    """
    mean, variance, threshold = np.broadcast_arrays(
        np.asarray(mean, dtype=float),
        np.asarray(variance, dtype=float),
        np.asarray(threshold, dtype=float),
    )
    mean, variance, threshold = (a.reshape(-1) for a in (mean, variance, threshold))
    if np.any(variance <= 0):
        raise ValueError("variance must be positive")
    s = float(s)
    whole = threshold <= 0
    arg = SQRT_2PI * threshold * np.sqrt(variance)
    empty = (~whole) & (arg > 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.sqrt(2.0 * variance * np.log(1.0 / arg))
    lo = np.where(whole, -s, np.maximum(mean - w, -s))
    hi = np.where(whole, s, np.minimum(mean + w, s))
    empty |= (~whole) & (lo > hi)
    lo = np.where(empty, np.nan, lo)
    hi = np.where(empty, np.nan, hi)
    return Intervals(lo, hi)


def superlevel_interval(mean: float, variance: float, threshold: float, s: float = math.inf) -> PredictionInterval:
    """Superlevel set of a single Gaussian density, clipped to ``[-s, s]``.

    For ``0 < threshold <= 1/sqrt(2 pi variance)`` the set is
    ``mean ± sqrt(2 variance log(1 / (sqrt(2 pi) threshold sqrt(variance))))``.
    """
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance!r}")
    if not s > 0:
        raise ValueError(f"s must be positive, got {s!r}")
    return superlevel_bounds(mean, variance, threshold, s)[0]


def _batch(x, d):
    X = np.asarray(x, dtype=float)
    single = X.ndim <= 1
    X = np.atleast_2d(X)
    if single and X.shape[1] != d:
        raise ValueError(f"query vector must have dimension {d}, got {X.shape[1]}")
    if X.ndim != 2 or X.shape[1] != d:
        raise ValueError(f"queries must have dimension {d}, got shape {X.shape}")
    return X, single


def _randomized_predict(density, threshold, X, rng, deterministic):
    n = X.shape[0]
    if deterministic:
        zeta = np.full(n, density.u / 2.0)
    else:
        zeta = density.draw_zeta(rng, n)
    mean, var = density.moments(X)
    # p_hat + zeta >= thr  <=>  gaussian part >= thr - zeta on [-s, s]
    return superlevel_bounds(mean, var, threshold - zeta, density.s)


@dataclass(frozen=True)
class LengthPI:
    density: CondDensityModel
    lambda_hat: float
    ell: float
    d: int

    def __post_init__(self):
        if not self.lambda_hat >= 0:
            raise ValueError("lambda_hat must be nonnegative")

    def predict(self, x, rng: SeededRng | None = None, deterministic: bool = False):
        return predict_length(self, x, rng, deterministic=deterministic)


@dataclass(frozen=True)
class CoveragePI:
    density: CondDensityModel
    t_beta: float
    beta: float
    d: int

    def __post_init__(self):
        if not self.t_beta >= 0:
            raise ValueError("t_beta must be nonnegative")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")

    def predict(self, x, rng: SeededRng | None = None, deterministic: bool = False):
        return predict_coverage(self, x, rng, deterministic=deterministic)


@dataclass(frozen=True)
class OraclePI:
    """Superlevel set of the true density at ``lambda_star``, clipped to ``[-s, s]``."""

    model: GaussianModel
    lambda_star: float
    s: float = math.inf

    def __post_init__(self):
        if not self.lambda_star >= 0:
            raise ValueError("lambda_star must be nonnegative")

    def predict(self, x):
        X, single = _batch(x, self.model.d)
        out = superlevel_bounds(self.model.mean(X), self.model.scale(X) ** 2, self.lambda_star, self.s)
        return out[0] if single else out


def fit_length_pi(
    density: CondDensityModel,
    unlabeled: UnlabeledDataset,
    ell: float,
    rng: SeededRng,
    m: int | None = None,
) -> tuple[LengthPI, GCurve]:
    """Calibrate a length-``ell`` predictor on unlabeled features."""
    if not isinstance(unlabeled, UnlabeledDataset):
        unlabeled = UnlabeledDataset(unlabeled)
    grid = make_grid(density.s, m or default_m(len(unlabeled)))
    g = build_g(density, unlabeled, grid, rng)
    return LengthPI(density, g_inverse(g, ell), float(ell), unlabeled.d), g


def fit_coverage_pi(
    density: CondDensityModel, calset: LabeledDataset, beta: float, rng: SeededRng
) -> CoveragePI:
    """Calibrate an error-rate-``beta`` predictor on labeled data."""
    if not isinstance(calset, LabeledDataset):
        calset = LabeledDataset(*calset)
    h = build_h(density, calset, rng)
    return CoveragePI(density, h_threshold(h, beta), float(beta), calset.d)


def predict_length(pi: LengthPI, x, rng: SeededRng | None = None, deterministic: bool = False):
    """Randomized interval ``{y : p_hat(y|x) + zeta >= lambda_hat}``, one fresh ``zeta`` per query.

    Returns a :class:`PredictionInterval` for a single vector and
    :class:`Intervals` for an ``(n, d)`` batch.  ``deterministic=True``
    fixes ``zeta = u/2`` and is meant for debugging only.
    """
    if rng is None and not deterministic:
        raise ValueError("an rng is required unless deterministic=True")
    X, single = _batch(x, pi.d)
    out = _randomized_predict(pi.density, pi.lambda_hat, X, rng, deterministic)
    return out[0] if single else out


def predict_coverage(pi: CoveragePI, x, rng: SeededRng | None = None, deterministic: bool = False):
    if rng is None and not deterministic:
        raise ValueError("an rng is required unless deterministic=True")
    X, single = _batch(x, pi.d)
    out = _randomized_predict(pi.density, pi.t_beta, X, rng, deterministic)
    return out[0] if single else out


def oracle_scores(model: GaussianModel, features, grid: Grid) -> np.ndarray:
    """True densities on the grid, shape ``(N, M)``."""
    mean, sd = model.mean(features), model.scale(features)
    out = np.empty((mean.shape[0], grid.m))
    for start in range(0, mean.shape[0], 1024):
        sl = slice(start, start + 1024)
        z = (grid.points[None, :] - mean[sl, None]) / sd[sl, None]
        out[sl] = np.exp(-0.5 * z * z) / (SQRT_2PI * sd[sl, None])
    return out


def oracle_lambda(
    model: GaussianModel, ell: float, n_mc: int, grid: Grid, rng: SeededRng
) -> float:
    """Estimate ``lambda*_ell = G^{-1}(ell)`` from ``n_mc`` feature draws and true densities."""
    if n_mc < 1:
        raise ValueError("n_mc must be positive")
    X = model.sample_features(int(n_mc), rng)
    scores = oracle_scores(model, X, grid)
    g = GCurve(scores.ravel(), grid.s, grid.m, int(n_mc))
    return g_inverse(g, ell)


def write_predictions(path, features, intervals: Intervals, labels=None) -> None:
    """Batch CSV ``x1..xd,lower,upper,length,covered`` (``covered`` blank without labels)."""
    X = np.atleast_2d(np.asarray(features, dtype=float))
    lengths = intervals.lengths()
    covered = intervals.contains(labels) if labels is not None else None
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(X.shape[1])] + ["lower", "upper", "length", "covered"])
        for i in range(X.shape[0]):
            row = [format(v, ".17g") for v in X[i]]
            row += [format(intervals.lower[i], ".17g"), format(intervals.upper[i], ".17g")]
            row.append(format(lengths[i], ".17g"))
            row.append("" if covered is None else str(int(covered[i])))
            w.writerow(row)
