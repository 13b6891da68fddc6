"""
Hitting a length budget with estimated densities
================================================

The plug-in interval replaces the regression function and the variance by
k-nearest-neighbour estimates, then calibrates its threshold on unlabeled
features only.  Whatever the estimator quality, the expected length lands
on the requested budget.
"""

from lengthpi import (
    CondDensityModel,
    KnnEstimator,
    SeededRng,
    UnlabeledDataset,
    fit_length_pi,
    sample,
)
from lengthpi.estimators import s_practice
from lengthpi.metrics import empirical_error, empirical_length
from lengthpi.synthetic import benchmark_model

model = benchmark_model(5)
rng = SeededRng(3)

train = sample(model, 500, rng)
est = KnnEstimator(train, k=50)
# s bounds the label range and clamps the variance into [1/s, s]
density = CondDensityModel.from_knn(est, s_practice(train.labels), u=1e-5)
print(f"s = {density.s:.3f}, k = {est.k}")

unlabeled = UnlabeledDataset(model.sample_features(100, rng))
test = sample(model, 1000, rng)

for ell in (0.1, 0.5, 1.0, 2.0):
    pi, g = fit_length_pi(density, unlabeled, ell, rng, m=100)
    iv = pi.predict(test.features, rng)
    print(
        f"ell={ell:<4} threshold={pi.lambda_hat:.4f}  length={empirical_length(iv):.3f}  "
        f"error={empirical_error(iv, test.labels):.3f}  empty={int(iv.is_empty.sum())}"
    )
