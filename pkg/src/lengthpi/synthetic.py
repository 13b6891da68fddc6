"""Heteroscedastic Gaussian regression models ``Y = f*(X) + sigma(X) * eps``."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import LabeledDataset, SeededRng, UnlabeledDataset, _as_features

SQRT_2PI = math.sqrt(2.0 * math.pi)


def gaussian_pdf(y, mean, sd):
    z = (np.asarray(y, dtype=float) - mean) / sd
    return np.exp(-0.5 * z * z) / (SQRT_2PI * sd)


def uniform_cube(d: int) -> Callable:
    """Feature sampler with i.i.d. Uniform[0, 1] coordinates."""

    def sampler(rng: SeededRng, n: int) -> np.ndarray:
        return rng.uniform(size=(n, d))

    return sampler


@dataclass(frozen=True)
class GaussianModel:
    """Conditional Gaussian model with known mean and scale functions.

    ``f_star`` and ``sigma`` map an ``(n, d)`` array to an ``(n,)`` array.
    ``feature_sampler(rng, n)`` returns ``n`` feature vectors.
    """

    f_star: Callable[[np.ndarray], np.ndarray]
    sigma: Callable[[np.ndarray], np.ndarray]
    d: int
    feature_sampler: Callable[[SeededRng, int], np.ndarray]
    name: str = "gaussian"

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")

    def mean(self, X) -> np.ndarray:
        X = self._check(X)
        return np.asarray(self.f_star(X), dtype=float).reshape(-1)

    def scale(self, X) -> np.ndarray:
        X = self._check(X)
        sd = np.asarray(self.sigma(X), dtype=float).reshape(-1)
        if not np.all(sd > 0):
            raise ValueError("sigma must be strictly positive on every feature vector")
        return sd

    def sample_features(self, n: int, rng: SeededRng) -> np.ndarray:
        return self._check(self.feature_sampler(rng, n))

    def _check(self, X):
        X = _as_features(X)
        if X.shape[1] != self.d:
            raise ValueError(f"expected {self.d}-dimensional features, got {X.shape[1]}")
        return X


def _norm(X):
    return np.sqrt(np.sum(X * X, axis=1))


def benchmark_model(d: int) -> GaussianModel:
    """``f*(x) = exp(-|x|)``, ``sigma(x) = d / (2 + 4|x|)``, X uniform on [0, 1]^d."""
    if int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    d = int(d)
    return GaussianModel(
        f_star=lambda X: np.exp(-_norm(X)),
        sigma=lambda X: d / (2.0 + 4.0 * _norm(X)),
        d=d,
        feature_sampler=uniform_cube(d),
        name=f"benchmark_d{d}",
    )


def homoscedastic_model(d: int = 1, sd: float = 0.5) -> GaussianModel:
    """Constant-scale model with ``f*(x) = x_1`` on the unit cube."""
    if not sd > 0:
        raise ValueError("sd must be positive")
    return GaussianModel(
        f_star=lambda X: X[:, 0].copy(),
        sigma=lambda X: np.full(X.shape[0], float(sd)),
        d=d,
        feature_sampler=uniform_cube(d),
        name=f"homoscedastic_sd{sd:g}",
    )


def sample(model: GaussianModel, n: int, rng: SeededRng) -> LabeledDataset:
    """Draw ``n`` i.i.d. pairs from ``model``."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    X = model.sample_features(int(n), rng)
    eps = rng.standard_normal(int(n))
    y = model.mean(X) + model.scale(X) * eps
    return LabeledDataset(X, y)


def sample_unlabeled(model: GaussianModel, n: int, rng: SeededRng) -> UnlabeledDataset:
    return UnlabeledDataset(model.sample_features(int(n), rng))


def oracle_density(model: GaussianModel, x, y):
    """True conditional density ``p(y | x)``.

    ``x`` may be a single vector or an ``(n, d)`` array; ``y`` broadcasts
    against the rows.
    """
    X = np.atleast_2d(np.asarray(x, dtype=float))
    scalar = np.ndim(x) <= 1 and np.ndim(y) == 0
    out = gaussian_pdf(y, model.mean(X), model.scale(X))
    return float(out[0]) if scalar else out


def write_csv(path, data: LabeledDataset | UnlabeledDataset) -> None:
    """Write ``x1..xd[,y]`` with 17 significant digits."""
    X = data.features
    header = [f"x{j + 1}" for j in range(X.shape[1])]
    labeled = isinstance(data, LabeledDataset)
    if labeled:
        header.append("y")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(X.shape[0]):
            row = [format(v, ".17g") for v in X[i]]
            if labeled:
                row.append(format(data.labels[i], ".17g"))
            w.writerow(row)


def read_csv(path) -> LabeledDataset | UnlabeledDataset:
    """Read a dataset written by :func:`write_csv`; a ``y`` column makes it labeled."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    xcols = [i for i, h in enumerate(header) if h.startswith("x")]
    if not xcols:
        raise ValueError(f"{path}: no feature columns (x1..xd) in header")
    body = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    if body.size == 0:
        raise ValueError(f"{path}: no data rows")
    X = body[:, xcols]
    if "y" in header:
        return LabeledDataset(X, body[:, header.index("y")])
    return UnlabeledDataset(X)
