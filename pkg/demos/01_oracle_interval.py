"""
The best interval for a length budget
=====================================

With the true conditional density in hand, the interval with the smallest
error rate among those whose expected length is at most ``ell`` keeps the
points where the density exceeds a single global threshold.  Where the
noise is small the interval is short and dense; where it is large the
interval may vanish entirely.
"""

import numpy as np

from lengthpi import OraclePI, SeededRng, make_grid, oracle_lambda
from lengthpi.metrics import coverage_probability
from lengthpi.synthetic import benchmark_model

# f*(x) = exp(-|x|), sigma(x) = d / (2 + 4|x|), x uniform on the unit cube
model = benchmark_model(1)

# the threshold is the generalized inverse of the expected superlevel length
grid = make_grid(5.0, 1000)
for ell in (0.1, 0.5, 1.0, 2.0):
    lam = oracle_lambda(model, ell, 2000, grid, SeededRng(0, 1))
    X = model.sample_features(20_000, SeededRng(0, 2))
    iv = OraclePI(model, lam).predict(X)
    err = 1 - coverage_probability(iv, model.mean(X), model.scale(X)).mean()
    print(f"ell={ell:<4} lambda*={lam:.4f}  mean length={iv.lengths().mean():.3f}  error={err:.3f}")

# lengths adapt to the local noise level
X = np.array([[0.0], [0.5], [1.0]])
iv = OraclePI(model, oracle_lambda(model, 1.0, 2000, grid, SeededRng(0, 1))).predict(X)
for x, lo, hi, s in zip(X[:, 0], iv.lower, iv.upper, model.scale(X)):
    print(f"x={x:.1f}  sigma={s:.3f}  interval=[{lo:.3f}, {hi:.3f}]")
