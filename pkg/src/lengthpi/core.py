"""Shared types: datasets, the calibration grid, intervals and seeded RNG streams."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri


def _as_features(features, name="features"):
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError(f"{name} must be a 2-d array of shape (n, d) with d >= 1")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


@dataclass(frozen=True)
class LabeledDataset:
    """n pairs (x_i, y_i) with x_i in R^d."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        X = _as_features(self.features)
        y = np.asarray(self.labels, dtype=float).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise ValueError(
                f"features has {X.shape[0]} rows but labels has {y.shape[0]} entries"
            )
        if X.shape[0] == 0:
            raise ValueError("dataset is empty")
        if not np.all(np.isfinite(y)):
            raise ValueError("labels contain non-finite values")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def __len__(self):
        return self.labels.shape[0]


@dataclass(frozen=True)
class UnlabeledDataset:
    features: np.ndarray

    def __post_init__(self):
        X = _as_features(self.features)
        if X.shape[0] == 0:
            raise ValueError("dataset is empty")
        X.setflags(write=False)
        object.__setattr__(self, "features", X)

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def __len__(self):
        return self.features.shape[0]


@dataclass(frozen=True)
class Grid:
    """Regular grid of ``m`` left cell endpoints covering [-s, s)."""

    s: float
    m: int
    points: np.ndarray = field(repr=False)

    @property
    def width(self) -> float:
        return 2.0 * self.s / self.m


def make_grid(s: float, m: int) -> Grid:
    """Left-endpoint grid ``y_k = -s + k * 2s/m`` for ``k = 0..m-1``.

    Points are computed from their index rather than by accumulating the
    step, so every run produces bit-identical grids.
    """
    if not (s > 0) or not math.isfinite(s):
        raise ValueError(f"s must be a positive finite real, got {s!r}")
    if int(m) != m or m < 2:
        raise ValueError(f"m must be an integer >= 2, got {m!r}")
    m = int(m)
    points = -s + np.arange(m) * (2.0 * s / m)
    points.setflags(write=False)
    return Grid(s=float(s), m=m, points=points)


@dataclass(frozen=True)
class PredictionInterval:
    """A closed interval ``[lower, upper]`` or the empty set.

    The empty interval is encoded with ``lower = upper = nan``; use
    :meth:`empty` and :attr:`is_empty` rather than testing the fields.
    """

    lower: float
    upper: float

    def __post_init__(self):
        lo, up = float(self.lower), float(self.upper)
        if math.isnan(lo) != math.isnan(up):
            raise ValueError("both endpoints must be nan for the empty interval")
        if not math.isnan(lo) and lo > up:
            raise ValueError(f"lower {lo} exceeds upper {up}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @classmethod
    def empty(cls) -> PredictionInterval:
        return cls(math.nan, math.nan)

    @property
    def is_empty(self) -> bool:
        return math.isnan(self.lower)

    def length(self) -> float:
        return interval_length(self)

    def __contains__(self, y) -> bool:
        return (not self.is_empty) and self.lower <= y <= self.upper


def interval_length(iv: PredictionInterval) -> float:
    if iv.is_empty:
        return 0.0
    return max(0.0, iv.upper - iv.lower)


@dataclass(frozen=True)
class Intervals:
    """A batch of intervals stored as two endpoint arrays (nan marks empty)."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        up = np.asarray(self.upper, dtype=float).reshape(-1)
        if lo.shape != up.shape:
            raise ValueError("lower and upper must have the same length")
        if np.any(np.isnan(lo) != np.isnan(up)):
            raise ValueError("empty intervals need nan on both endpoints")
        if np.any(lo > up):
            raise ValueError("some lower endpoints exceed their upper endpoints")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    def __len__(self):
        return self.lower.shape[0]

    def __getitem__(self, i) -> PredictionInterval:
        return PredictionInterval(self.lower[i], self.upper[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @classmethod
    def from_list(cls, intervals) -> Intervals:
        intervals = list(intervals)
        return cls(
            np.array([iv.lower for iv in intervals], dtype=float),
            np.array([iv.upper for iv in intervals], dtype=float),
        )

    @property
    def is_empty(self) -> np.ndarray:
        return np.isnan(self.lower)

    def lengths(self) -> np.ndarray:
        return np.where(self.is_empty, 0.0, self.upper - self.lower)

    def contains(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        with np.errstate(invalid="ignore"):
            return (self.lower <= y) & (y <= self.upper)


class SeededRng:
    """Reproducible random stream identified by ``(seed, stream)``.

    Backed by numpy's PCG64 bit generator, keyed through ``SeedSequence``
    with ``spawn_key=(stream,)`` so that distinct streams of the same seed
    are statistically independent.  ``stream`` may also be a tuple of
    nonnegative integers, e.g. ``(rep, d)``, naming a nested sub-stream.

    Uniform doubles use 53 random bits; standard normals are produced by
    inverse-CDF transform (Cephes ``ndtri``) of open-interval uniforms,
    which keeps draws identical across platforms.
    """

    def __init__(self, seed: int, stream: int | tuple[int, ...] = 0):
        key = tuple(stream) if isinstance(stream, (tuple, list)) else (stream,)
        if seed < 0 or any(k < 0 for k in key):
            raise ValueError("seed and stream must be nonnegative integers")
        self.seed = int(seed)
        self.stream = key if len(key) > 1 else int(key[0])
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=tuple(int(k) for k in key))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"SeededRng(seed={self.seed}, stream={self.stream})"

    def spawn(self, stream) -> SeededRng:
        """A fresh stream of the same seed."""
        return SeededRng(self.seed, stream)

    def uniform(self, low=0.0, high=1.0, size=None):
        """Uniform draws on ``[low, high)``."""
        return low + (high - low) * self._gen.random(size)

    def _open_uniform(self, size):
        k = self._gen.integers(0, 2**53, size=size, dtype=np.int64)
        return (k + 0.5) / 2.0**53

    def standard_normal(self, size=None):
        return ndtri(self._open_uniform(size))

    def choice(self, n, size, replace=False):
        return self._gen.choice(n, size=size, replace=replace)
