"""
From CSV files to prediction intervals
======================================

The same pipeline works on any table with columns ``x1..xd[,y]``.  Here
the tables are simulated and written to a temporary directory, then read
back, fitted, and the intervals written out with a ``covered`` column.
"""

import tempfile
from pathlib import Path

from lengthpi import SeededRng, fit_length_pi, sample
from lengthpi import experiments as ex
from lengthpi.predictor import write_predictions
from lengthpi.synthetic import benchmark_model, read_csv, sample_unlabeled, write_csv

model = benchmark_model(2)
tmp = Path(tempfile.mkdtemp())
write_csv(tmp / "train.csv", sample(model, 400, SeededRng(0, 0)))
write_csv(tmp / "unlabeled.csv", sample_unlabeled(model, 200, SeededRng(0, 1)))
write_csv(tmp / "test.csv", sample(model, 10, SeededRng(0, 2)))

train = read_csv(tmp / "train.csv")
config = ex.ExperimentConfig("demo", k="auto")
density = ex.fit_density(train, config, n_unlabeled=200)
pi, _ = fit_length_pi(density, read_csv(tmp / "unlabeled.csv"), 0.8, SeededRng(0, 3))

test = read_csv(tmp / "test.csv")
write_predictions(tmp / "pred.csv", test.features, pi.predict(test.features, SeededRng(0, 4)), test.labels)
print((tmp / "pred.csv").read_text())
# the lengths barely vary: with s near 2 the clamp floor 1/s exceeds most of
# the true variances, so nearly every point gets the same estimated spread
print(f"s = {density.s:.3f}, variance floor = {1 / density.s:.3f}")
