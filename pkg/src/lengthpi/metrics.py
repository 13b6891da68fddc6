"""Evaluation of interval predictors: length, error rate, risk, excess risk, symmetric difference.

Metrics other than length and error rate compare against the oracle and
need the true conditional density, so they are only available on
simulated data.  A *predictor* here is anything with a ``predict(X)``
method, or a plain callable, returning :class:`~lengthpi.core.Intervals`
for an ``(n, d)`` feature array.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import ndtr

from .core import Intervals, SeededRng
from .synthetic import GaussianModel, gaussian_pdf


def _as_intervals(intervals) -> Intervals:
    if isinstance(intervals, Intervals):
        return intervals
    return Intervals.from_list(intervals)


def _call(pred, X) -> Intervals:
    out = pred.predict(X) if hasattr(pred, "predict") else pred(X)
    return _as_intervals(out)


def empirical_length(intervals) -> float:
    """Mean Lebesgue measure of a non-empty batch of intervals."""
    iv = _as_intervals(intervals)
    if len(iv) == 0:
        raise ValueError("need at least one interval")
    return float(np.mean(iv.lengths()))


def empirical_error(intervals, labels) -> float:
    """Fraction of labels outside their interval; an empty interval never covers."""
    iv = _as_intervals(intervals)
    y = np.asarray(labels, dtype=float).reshape(-1)
    if y.shape[0] != len(iv):
        raise ValueError(f"{len(iv)} intervals but {y.shape[0]} labels")
    if y.shape[0] == 0:
        raise ValueError("need at least one interval")
    return float(np.mean(~iv.contains(y)))


def coverage_probability(intervals, mean, sd) -> np.ndarray:
    """Exact ``P(Y in interval)`` for ``Y ~ N(mean, sd^2)``, elementwise."""
    iv = _as_intervals(intervals)
    empty = iv.is_empty
    lo = np.where(empty, 0.0, iv.lower)
    hi = np.where(empty, 0.0, iv.upper)
    p = ndtr((hi - mean) / sd) - ndtr((lo - mean) / sd)
    return np.where(empty, 0.0, p)


def _difference(a: Intervals, b: Intervals):
    """Pieces of ``a \\ b``: two (lo, hi) pairs per row, width 0 when absent."""
    a_empty, b_empty = a.is_empty, b.is_empty
    alo = np.where(a_empty, 0.0, a.lower)
    ahi = np.where(a_empty, 0.0, a.upper)
    blo = np.where(b_empty, np.inf, b.lower)
    bhi = np.where(b_empty, np.inf, b.upper)
    # left piece: part of a below b; right piece: part of a above b
    l1, h1 = alo, np.minimum(ahi, blo)
    l2, h2 = np.where(b_empty, ahi, np.maximum(alo, bhi)), ahi
    h1 = np.maximum(h1, l1)
    h2 = np.maximum(h2, l2)
    return [(l1, h1), (l2, h2)]


def symmetric_difference_pieces(a, b):
    """The at most four intervals making up ``a △ b`` for each row."""
    a, b = _as_intervals(a), _as_intervals(b)
    return _difference(a, b) + _difference(b, a)


def symmetric_difference_measure(a, b) -> np.ndarray:
    return sum(hi - lo for lo, hi in symmetric_difference_pieces(a, b))


def _romberg(func, lo, hi, tol=1e-10, min_panels=16, max_level=20):
    """Vectorised Romberg integration of ``func(y, rows)`` over ``[lo, hi]`` per row.

    ``func`` receives an array of abscissae of shape ``(r, j)`` and the row
    indices ``rows`` they belong to.  Rows keep refining (trapezoid halving
    plus Richardson extrapolation) until successive diagonal entries agree
    to ``tol``.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n_rows = lo.shape[0]
    result = np.zeros(n_rows)
    active = np.flatnonzero(hi > lo)
    if active.size == 0:
        return result
    a, b = lo[active], hi[active]
    width = b - a
    nodes = a[:, None] + width[:, None] * np.linspace(0.0, 1.0, min_panels + 1)[None, :]
    vals = func(nodes, active)
    h = width / min_panels
    trap = h * (vals.sum(axis=1) - 0.5 * (vals[:, 0] + vals[:, -1]))
    table = [trap]
    panels = min_panels
    rows = np.arange(active.size)
    for level in range(1, max_level + 1):
        h = width[rows] / (2 * panels)
        mids = a[rows, None] + h[:, None] * (2 * np.arange(panels)[None, :] + 1)
        new_trap = 0.5 * table[0] + h * func(mids, active[rows]).sum(axis=1)
        new_row = [new_trap]
        for j in range(1, len(table) + 1):
            factor = 4.0**j
            new_row.append(new_row[j - 1] + (new_row[j - 1] - table[j - 1]) / (factor - 1.0))
        done = np.abs(new_row[-1] - table[-1]) <= tol * np.maximum(1.0, np.abs(new_row[-1]))
        if level >= 2 and np.any(done):
            result[active[rows[done]]] = new_row[-1][done]
            keep = ~done
            rows = rows[keep]
            new_row = [r[keep] for r in new_row]
        table = new_row
        panels *= 2
        if rows.size == 0:
            return result
    result[active[rows]] = table[-1]
    return result


def _draw(model: GaussianModel, n_mc: int, rng: SeededRng):
    if n_mc < 1:
        raise ValueError("n_mc must be positive")
    X = model.sample_features(int(n_mc), rng)
    return X, model.mean(X), model.scale(X)


def risk(pred, model: GaussianModel, lambda_star: float, n_mc: int, rng: SeededRng) -> float:
    """Monte-Carlo estimate of ``P(Y not in Gamma(X)) + lambda_star * E[L(Gamma(X))]``.

    Coverage at each sampled ``x`` uses the exact Gaussian CDF, so only
    the features are sampled.
    """
    X, f, sd = _draw(model, n_mc, rng)
    iv = _call(pred, X)
    miss = 1.0 - coverage_probability(iv, f, sd)
    return float(np.mean(miss) + lambda_star * np.mean(iv.lengths()))


def excess_risk(
    pred, oracle, model: GaussianModel, n_mc: int, quad_points: int = 16, rng: SeededRng | None = None
) -> float:
    """``E[ integral over Gamma(X) △ Gamma*(X) of |p(y|X) - lambda*| dy ]``.

    Each of the at most four pieces of the symmetric difference is
    integrated by Romberg refinement of the trapezoidal rule, starting from
    ``quad_points`` panels.
    """
    if rng is None:
        raise ValueError("rng is required")
    X, f, sd = _draw(model, n_mc, rng)
    lam = oracle.lambda_star
    pieces = symmetric_difference_pieces(_call(pred, X), _call(oracle, X))

    def integrand(y, rows):
        return np.abs(gaussian_pdf(y, f[rows, None], sd[rows, None]) - lam)

    total = np.zeros(X.shape[0])
    for lo, hi in pieces:
        total += _romberg(integrand, lo, hi, min_panels=max(2, int(quad_points)))
    return float(np.mean(total))


def sym_diff(pred, oracle, model: GaussianModel, n_mc: int, rng: SeededRng) -> float:
    """Monte-Carlo ``E[L(Gamma(X) △ Gamma*(X))]``."""
    X, _, _ = _draw(model, n_mc, rng)
    return float(np.mean(symmetric_difference_measure(_call(pred, X), _call(oracle, X))))


def excess_risk_bound_constant(lambda_star: float, s: float) -> float:
    """``max(lambda*, sqrt(s / 2pi))``, a bound on ``|p - lambda*|`` whenever ``sigma^2 >= 1/s``."""
    return max(lambda_star, math.sqrt(s / (2.0 * math.pi)))


@dataclass
class EvalResult:
    mean_length: float
    error_rate: float
    n_test: int
    n_empty: int
    excess_risk: float | None = None
    sym_diff: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.error_rate <= 1.0:
            raise ValueError("error_rate must lie in [0, 1]")
        if self.mean_length < 0:
            raise ValueError("mean_length must be nonnegative")

    def to_csv_row(self, **config) -> str:
        """One CSV line: metric columns, then ``config`` echo (include the seed)."""
        fields = asdict(self) | config
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields.keys())
        w.writerow(_fmt(v) for v in fields.values())
        return buf.getvalue()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def evaluate(intervals, labels) -> EvalResult:
    iv = _as_intervals(intervals)
    return EvalResult(
        mean_length=empirical_length(iv),
        error_rate=empirical_error(iv, labels),
        n_test=len(iv),
        n_empty=int(np.count_nonzero(iv.is_empty)),
    )
