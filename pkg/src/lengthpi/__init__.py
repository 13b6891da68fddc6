"""Prediction intervals with controlled expected length for heteroscedastic Gaussian regression."""

from .calibration import GCurve, HCurve, build_g, build_h, g_eval, g_inverse, h_eval, h_threshold
from .core import (
    Grid,
    Intervals,
    LabeledDataset,
    PredictionInterval,
    SeededRng,
    UnlabeledDataset,
    interval_length,
    make_grid,
)
from .density import CondDensityModel, Perturbation, l1_density_distance, p_hat, p_hat_randomized
from .estimators import KnnEstimator, clamp_variance, default_k, knn_regress, knn_variance, s_practice, s_theory
from .metrics import (
    EvalResult,
    empirical_error,
    empirical_length,
    evaluate,
    excess_risk,
    risk,
    sym_diff,
)
from .predictor import (
    CoveragePI,
    LengthPI,
    OraclePI,
    fit_coverage_pi,
    fit_length_pi,
    oracle_lambda,
    predict_coverage,
    predict_length,
    superlevel_interval,
)
from .synthetic import GaussianModel, oracle_density, benchmark_model, sample

__version__ = "0.1.0"
