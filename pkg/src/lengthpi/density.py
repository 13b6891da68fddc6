"""Plug-in conditional density built from mean and variance estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr

from .core import SeededRng, _as_features
from .estimators import KnnEstimator, clamp_variance
from .synthetic import GaussianModel, gaussian_pdf

DEFAULT_U = 1e-5


@dataclass(frozen=True)
class Perturbation:
    zeta: float

    def __post_init__(self):
        if not self.zeta >= 0:
            raise ValueError("zeta must be nonnegative")


@dataclass(frozen=True)
class CondDensityModel:
    """Gaussian plug-in density truncated to ``[-s, s]``.

    ``f_hat`` and ``sigma2_raw`` are any two functions mapping an ``(n, d)``
    array to ``(n,)`` arrays; the raw variance is clamped to ``[1/s, s]``
    before use.  ``u`` is the upper end of the uniform perturbation that
    breaks ties in the calibration scores.
    """

    f_hat: Callable[[np.ndarray], np.ndarray]
    sigma2_raw: Callable[[np.ndarray], np.ndarray]
    s: float
    u: float = DEFAULT_U

    def __post_init__(self):
        if not (self.s > 0 and math.isfinite(self.s)):
            raise ValueError(f"s must be positive and finite, got {self.s!r}")
        if not self.u >= 0:
            raise ValueError(f"u must be nonnegative, got {self.u!r}")

    @classmethod
    def from_knn(cls, est: KnnEstimator, s: float, u: float = DEFAULT_U) -> CondDensityModel:
        return cls(est.regress, est.variance, float(s), float(u))

    def moments(self, X):
        """Mean estimate and clamped variance estimate at each row of ``X``."""
        X = _as_features(X, "x")
        mean = np.asarray(self.f_hat(X), dtype=float).reshape(-1)
        var = clamp_variance(np.asarray(self.sigma2_raw(X), dtype=float).reshape(-1), self.s)
        return mean, var

    def draw_zeta(self, rng: SeededRng, size) -> np.ndarray:
        return rng.uniform(0.0, self.u, size=size)


def _density(mean, var, y, s):
    y = np.asarray(y, dtype=float)
    return np.where(np.abs(y) <= s, gaussian_pdf(y, mean, np.sqrt(var)), 0.0)


def p_hat(model: CondDensityModel, x, y):
    """Truncated plug-in density ``p_hat(y | x)``; scalar in, scalar out."""
    scalar = np.ndim(x) <= 1 and np.ndim(y) == 0
    mean, var = model.moments(np.atleast_2d(np.asarray(x, dtype=float)))
    out = _density(mean, var, y, model.s)
    return float(out[0]) if scalar else out


def p_hat_randomized(model: CondDensityModel, x, y, zeta):
    """``p_hat(y | x) + zeta`` on ``[-s, s]``, zero outside."""
    z = zeta.zeta if isinstance(zeta, Perturbation) else np.asarray(zeta, dtype=float)
    base = p_hat(model, x, y)
    inside = np.abs(np.asarray(y, dtype=float)) <= model.s
    out = base + np.where(inside, z, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def density_bound(s: float) -> float:
    """Upper bound ``sqrt(s / 2pi)`` of any density with variance clamped at ``1/s``."""
    return math.sqrt(s / (2.0 * math.pi))


def l1_density_distance(
    model: CondDensityModel, truth: GaussianModel, xs, quad_points: int = 2001
) -> float:
    """Average over ``xs`` of the L1 distance between ``p_hat(.|x)`` and ``p(.|x)``.

    The part on ``[-s, s]`` uses the trapezoidal rule on ``quad_points``
    nodes; the true density's mass outside ``[-s, s]`` is added exactly.
    """
    if quad_points < 100:
        raise ValueError("quad_points must be at least 100")
    X = _as_features(xs, "xs")
    s = model.s
    ys = np.linspace(-s, s, int(quad_points))
    mean, var = model.moments(X)
    f, sd = truth.mean(X), truth.scale(X)
    total = 0.0
    for i in range(X.shape[0]):
        diff = np.abs(_density(mean[i], var[i], ys, s) - gaussian_pdf(ys, f[i], sd[i]))
        inner = np.trapezoid(diff, ys)
        tails = ndtr((-s - f[i]) / sd[i]) + ndtr(-(s - f[i]) / sd[i])
        total += inner + tails
    return total / X.shape[0]
