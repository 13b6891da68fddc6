"""k-nearest-neighbour estimates of the regression and conditional variance functions."""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from .core import LabeledDataset, _as_features

# rows of the query distance matrix handled per chunk
_CHUNK = 512


def default_k(n: int, d: int) -> int:
    """Neighbour count ``max(1, round(n ** (2 / (d + 2))))``, capped at ``n``."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    return int(min(n, max(1, round(n ** (2.0 / (d + 2))))))


def clamp_variance(v, s: float):
    """Force variance estimates into ``[1/s, s]``."""
    if not s > 0:
        raise ValueError(f"s must be positive, got {s!r}")
    lo, hi = 1.0 / s, float(s)
    if lo > hi:
        # s < 1: the window is empty; the lower bound wins as in the indicator sum
        lo = hi = 1.0 / s
    out = np.clip(np.asarray(v, dtype=float), lo, hi)
    return float(out) if np.ndim(v) == 0 else out


class KnnEstimator:
    """Brute-force kNN estimator of ``f*`` and ``sigma^2`` with Euclidean distance.

    Neighbours are ordered by distance, ties broken by training index, so
    results do not depend on platform sort details.  The variance estimate
    averages ``(Y_j - f_hat(X_j))^2`` over the ``k`` neighbours ``j`` of the
    query, with ``f_hat`` evaluated at each neighbour's own features.
    """

    def __init__(self, training: LabeledDataset, k: int | None = None):
        if not isinstance(training, LabeledDataset):
            training = LabeledDataset(*training)
        n = len(training)
        if k is None:
            k = default_k(n, training.d)
        if int(k) != k or not 1 <= k <= n:
            raise ValueError(f"k must be an integer in [1, {n}], got {k!r}")
        self.training = training
        self.k = int(k)

    def __repr__(self):
        return f"KnnEstimator(n={len(self.training)}, d={self.training.d}, k={self.k})"

    def neighbors(self, X) -> np.ndarray:
        """Indices (ascending) of the ``k`` nearest training points for each query row.

        Among training points tied at the ``k``-th distance the lowest
        indices are kept.  The result for the most recent query batch is
        cached.
        """
        X = self._check(X)
        key = (X.shape, hash(X.tobytes()))
        cached = getattr(self, "_last_query", None)
        if cached is not None and cached[0] == key and np.array_equal(cached[1], X):
            return cached[2]
        T = self.training.features
        n, k = T.shape[0], self.k
        out = np.empty((X.shape[0], k), dtype=np.intp)
        for start in range(0, X.shape[0], _CHUNK):
            Q = X[start:start + _CHUNK]
            diff = Q[:, None, :] - T[None, :, :]
            dist2 = np.einsum("ijk,ijk->ij", diff, diff)
            if k == n:
                selected = np.ones_like(dist2, dtype=bool)
            else:
                kth = np.partition(dist2, k - 1, axis=1)[:, k - 1 : k]
                less = dist2 < kth
                tied = dist2 == kth
                need = k - less.sum(axis=1, keepdims=True)
                selected = less | (tied & (np.cumsum(tied, axis=1) <= need))
            out[start:start + _CHUNK] = np.nonzero(selected)[1].reshape(-1, k)
        out.setflags(write=False)
        self._last_query = (key, X.copy(), out)
        return out

    def regress(self, X) -> np.ndarray:
        idx = self.neighbors(X)
        return self.training.labels[idx].mean(axis=1)

    @cached_property
    def _train_sq_residuals(self) -> np.ndarray:
        fitted = self.regress(self.training.features)
        return (self.training.labels - fitted) ** 2

    def variance(self, X) -> np.ndarray:
        idx = self.neighbors(X)
        return self._train_sq_residuals[idx].mean(axis=1)

    def _check(self, X):
        X = _as_features(X, "query")
        if X.shape[1] != self.training.d:
            raise ValueError(
                f"query has dimension {X.shape[1]}, training data has {self.training.d}"
            )
        return X


def _single_or_batch(func, est, x):
    x = np.asarray(x, dtype=float)
    if x.ndim <= 1:
        if x.ndim == 0 or x.shape[0] != est.training.d:
            raise ValueError(
                f"query vector must have dimension {est.training.d}, got shape {x.shape}"
            )
        return float(func(x.reshape(1, -1))[0])
    return func(x)


def knn_regress(est: KnnEstimator, x):
    """Mean label of the ``k`` nearest neighbours of ``x`` (vector or batch)."""
    return _single_or_batch(est.regress, est, x)


def knn_variance(est: KnnEstimator, x):
    return _single_or_batch(est.variance, est, x)


def s_practice(labels) -> float:
    """Support half-width ``max(-min(y), max(y))`` from training labels."""
    y = np.asarray(labels, dtype=float)
    return float(max(-y.min(), y.max()))


def s_theory(n: int, n_unlabeled: int) -> float:
    """Support half-width ``log(min(n, N))``."""
    m = min(n, n_unlabeled)
    if m < 2:
        raise ValueError("log(min(n, N)) needs min(n, N) >= 2")
    return math.log(m)
