"""Empirical calibration curves and their generalized inverses.

``G_hat(t)`` is the Riemann-sum estimate of the expected measure of the
density superlevel set ``{y : p_hat(y|X) > t}``; inverting it at a length
budget gives the density threshold of the length-constrained interval.
``H_hat(t)`` is the fraction of labeled calibration points whose own
density score is at least ``t``; inverting it at ``1 - beta`` gives the
threshold of the coverage-constrained interval.
"""

from __future__ import annotations

import csv
import math
import warnings

import numpy as np

from .core import Grid, LabeledDataset, SeededRng, UnlabeledDataset
from .density import CondDensityModel


def _kth_largest(values: np.ndarray, r: int) -> float:
    """0-based ``r``-th largest element."""
    n = values.shape[0]
    return float(np.partition(values, n - 1 - r)[n - 1 - r])


class _ScoreCurve:
    def __init__(self, scores):
        raw = np.asarray(scores, dtype=float).reshape(-1)
        if raw.size == 0:
            raise ValueError("a calibration curve needs at least one score")
        if not np.all(np.isfinite(raw)):
            raise ValueError("scores must be finite")
        self._raw = raw
        self._sorted = None
        self._ascending_neg = None

    @property
    def scores(self) -> np.ndarray:
        """Scores in descending order (sorted on first access)."""
        if self._sorted is None:
            s = np.sort(self._raw)[::-1].copy()
            s.setflags(write=False)
            self._sorted = s
        return self._sorted

    @property
    def size(self) -> int:
        return self._raw.shape[0]

    def count_above(self, t, strict=True):
        """Number of scores ``> t`` (or ``>= t`` when ``strict`` is False)."""
        side = "left" if strict else "right"
        if self._sorted is None and np.ndim(t) == 0:
            return int(np.count_nonzero(self._raw > t if strict else self._raw >= t))
        if self._ascending_neg is None:
            # descending scores, negated, are ascending
            self._ascending_neg = -self.scores
        return np.searchsorted(self._ascending_neg, -np.asarray(t, dtype=float), side=side)

    def order_statistic(self, r: int) -> float:
        if self._sorted is not None:
            return float(self._sorted[r])
        return _kth_largest(self._raw, r)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["score"])
            for v in self.scores:
                w.writerow([format(v, ".17g")])


class GCurve(_ScoreCurve):
    """Step function ``t -> cell_mass * #{scores > t}`` with ``cell_mass = 2s/(M N)``."""

    def __init__(self, scores, s: float, m: int, n_unlabeled: int):
        super().__init__(scores)
        if self.size != m * n_unlabeled:
            raise ValueError(f"expected {m * n_unlabeled} scores, got {self.size}")
        self.s = float(s)
        self.m = int(m)
        self.n_unlabeled = int(n_unlabeled)
        self.cell_mass = 2.0 * self.s / (self.m * self.n_unlabeled)

    def __repr__(self):
        return f"GCurve(s={self.s}, m={self.m}, n_unlabeled={self.n_unlabeled})"

    def __call__(self, t):
        return g_eval(self, t)


class HCurve(_ScoreCurve):
    """Step function ``t -> #{scores >= t} / K``."""

    @property
    def k_cal(self) -> int:
        return self.size

    def __repr__(self):
        return f"HCurve(k_cal={self.k_cal})"

    def __call__(self, t):
        return h_eval(self, t)


def grid_scores(model: CondDensityModel, features, grid: Grid, zeta) -> np.ndarray:
    """Matrix ``p_hat(y_k | x_i) + zeta_i`` of shape ``(N, M)``."""
    mean, var = model.moments(features)
    sd = np.sqrt(var)
    z = (grid.points[None, :] - mean[:, None]) / sd[:, None]
    dens = np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * sd[:, None])
    # every grid point lies in [-s, s), so the support indicator is 1
    return dens + np.asarray(zeta, dtype=float).reshape(-1, 1)


def build_g(
    model: CondDensityModel, unlabeled: UnlabeledDataset, grid: Grid, rng: SeededRng
) -> GCurve:
    """Length-calibration curve from ``N`` unlabeled points and an ``M``-point grid.

    One perturbation ``zeta_i ~ U[0, u]`` is drawn per unlabeled point.
    """
    if not math.isclose(grid.s, model.s, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError(f"grid half-width {grid.s} does not match model s={model.s}")
    if not isinstance(unlabeled, UnlabeledDataset):
        unlabeled = UnlabeledDataset(unlabeled)
    n = len(unlabeled)
    zeta = model.draw_zeta(rng, n)
    scores = grid_scores(model, unlabeled.features, grid, zeta)
    return GCurve(scores.ravel(), grid.s, grid.m, n)


def g_eval(g: GCurve, t):
    """``G_hat(t) = cell_mass * #{scores > t}``."""
    return g.cell_mass * g.count_above(t, strict=True)


def _length_rank(g: GCurve, ell: float) -> int:
    """Largest ``r`` in ``[0, M N]`` with ``cell_mass * r <= ell`` in floating point."""
    total = g.size
    r = min(total, int(math.floor(ell / g.cell_mass)))
    while r < total and g.cell_mass * (r + 1) <= ell:
        r += 1
    while r > 0 and g.cell_mass * r > ell:
        r -= 1
    return r


def g_inverse(g: GCurve, ell: float) -> float:
    """Generalized inverse ``inf{t >= 0 : G_hat(t) <= ell}``.

    Equal to the ``(r+1)``-th largest score where ``r = floor(ell / cell_mass)``,
    or 0 when the budget covers every grid cell.
    """
    if not ell > 0:
        raise ValueError(f"ell must be positive, got {ell!r}")
    if ell > 2.0 * g.s:
        warnings.warn(
            f"requested length {ell} exceeds the support length 2s={2 * g.s}; "
            "returning the whole support",
            stacklevel=2,
        )
    r = _length_rank(g, ell)
    if r >= g.size:
        return 0.0
    return g.order_statistic(r)


def calibration_scores(model: CondDensityModel, calset: LabeledDataset, zeta) -> np.ndarray:
    mean, var = model.moments(calset.features)
    y = calset.labels
    inside = np.abs(y) <= model.s
    dens = np.exp(-0.5 * (y - mean) ** 2 / var) / np.sqrt(2.0 * math.pi * var)
    return np.where(inside, dens + np.asarray(zeta, dtype=float), 0.0)


def build_h(model: CondDensityModel, calset: LabeledDataset, rng: SeededRng) -> HCurve:
    """Coverage-calibration curve from ``K`` labeled points."""
    if not isinstance(calset, LabeledDataset):
        calset = LabeledDataset(*calset)
    zeta = model.draw_zeta(rng, len(calset))
    return HCurve(calibration_scores(model, calset, zeta))


def h_eval(h: HCurve, t):
    """``H_hat(t) = #{scores >= t} / K``."""
    return h.count_above(t, strict=False) / h.k_cal


def h_threshold(h: HCurve, beta: float) -> float:
    """``t_beta = inf{t >= 0 : H_hat(t) <= 1 - beta}``.

    This is the ``(floor((1-beta) K) + 1)``-th largest score, or 0 when that
    rank exceeds ``K``.  With the ``>=`` indicator the infimum is a right
    limit: ``H_hat(t) <= 1 - beta`` holds for every ``t > t_beta``.
    """
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta!r}")
    # guard against (1 - beta) * K landing a hair below an integer
    j = int(math.floor((1.0 - beta) * h.k_cal + 1e-9))
    if j >= h.k_cal:
        return 0.0
    return h.order_statistic(j)
