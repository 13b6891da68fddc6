"""
How far is an interval from the oracle?
=======================================

Two distances to the oracle interval are available on simulated data:
the expected measure of the symmetric difference, and the excess risk,
which weighs each point of that difference by how far the density is from
the oracle threshold.  The excess risk equals the gap in risk
``P(Y not in Gamma) + lambda* E[length]`` and is never negative.
"""

import numpy as np

from lengthpi import Intervals, OraclePI, SeededRng, make_grid, oracle_lambda
from lengthpi.metrics import excess_risk, excess_risk_bound_constant, risk, sym_diff
from lengthpi.synthetic import benchmark_model

model = benchmark_model(1)
lam = oracle_lambda(model, 1.0, 5000, make_grid(5.0, 1000), SeededRng(0))
oracle = OraclePI(model, lam)


def widened(delta):
    def pred(X):
        iv = oracle.predict(X)
        return Intervals(iv.lower - delta, iv.upper + delta)

    return pred


bound = excess_risk_bound_constant(lam, 36.0)
for delta in (0.0, 0.05, 0.2, 0.5):
    pred = widened(delta)
    gap = risk(pred, model, lam, 5000, SeededRng(1)) - risk(oracle, model, lam, 5000, SeededRng(1))
    er = excess_risk(pred, oracle, model, 5000, rng=SeededRng(1))
    h = sym_diff(pred, oracle, model, 5000, SeededRng(1))
    print(f"delta={delta:<4}  risk gap={gap:.6f}  excess risk={er:.6f}  sym diff={h:.3f}  bound={bound * h:.3f}")

print("identity holds:", np.isclose(gap, er, atol=1e-8))
