"""Distributional regression by varying-thresholds models.

A family of binary models ``P(Y > theta | x) = F(eta(theta, x))`` fitted over
a grid of thresholds yields the whole conditional distribution of ``Y``.
"""

__version__ = "0.1.0"

from ._errors import DataError, FitError, SingleClassError, VTError
from .data import Dataset, ScalingRecord, load_csv, simulate_linear, split, standardize
from .distribution import (ConditionalCDF, FitConfig, VTFit, cdf_eval, conditional_cdf, fit_config,
                           fit_varying_thresholds, moments, quantile, rps)
from .evaluate import EvalReport, compare_methods, glm_baseline
from .forest import Forest, ForestParams, Tree, fit_forest, fit_tree, forest_prob
from .glm import BinaryFit, fit_irls, fit_lasso, predict_eta
from .inference import CoefBands, bootstrap_bands, wald_bands
from .isotonic import MonotoneSeq, pava_nonincreasing
from .links import LOGIT, PROBIT, LinkFunction
from .spline_ml import (PMLFit, SplineSpec, bspline_basis, bspline_deriv, coef_function,
                        fit_penalized_ml, implied_linear_model, select_lambda_cv)
from .thresholds import ThresholdGrid, binarize, build_grid, ordinal_grid
