"""
Calibrating on length versus calibrating on coverage
====================================================

Both intervals threshold the same estimated density.  One picks the
threshold from unlabeled features so the expected length is 2, the other
from labeled points so the error rate is 0.17.  At the population level
they coincide.  With only ten calibration points the coverage threshold
rests on a couple of order statistics of labeled scores and its length
swings widely, while the length threshold averages over a whole grid of
densities per point.
"""

from lengthpi import experiments as ex

report = ex.run_comparison(ex.compare_config(N=(10, 100, 1000), reps=20))
print(f"{'N':>5}  {'method':<12} {'length':>14} {'coverage':>14}")
for N in (10, 100, 1000):
    for method in ("length_pi", "coverage_pi"):
        exp = f"compare.{method}"
        lm, ls = report.cell(experiment=exp, N=N, metric="length")
        cm, cs = report.cell(experiment=exp, N=N, metric="coverage")
        print(f"{N:>5}  {method:<12} {lm:7.3f} ({ls:.3f}) {cm:7.3f} ({cs:.3f})")
