"""Signed likelihood-root inference with covariance-based adjustments.

The package fits regular parametric models, evaluates the signed likelihood
root R and two computable modifications of it (one from model-expected
likelihood covariances, one from their empirical counterparts), inverts any
of the three into one-sided confidence limits, and runs reproducible Monte
Carlo coverage studies.
"""

from .datasets import DATASET_IDS, get_dataset, leukemia21
from .estimator import SignedRootEstimator
from .exceptions import (
    BracketError,
    CovarianceError,
    DataError,
    DomainError,
    FitError,
    InconsistentFitError,
    InvalidInputError,
    QuadratureError,
    SignedRootError,
    SingularityError,
    SingularMatrixError,
)
from .fitting import ConstrainedFit, FitResult, fit_constrained, fit_full, profile_loglik
from .inference import (
    BracketPolicy,
    LimitRequest,
    LimitResult,
    p_value,
    two_sided_interval,
    upper_limit,
)
from .models import (
    CovarianceBundle,
    Dataset,
    LinearExponentialModel,
    MODEL_IDS,
    NormalModel,
    ParameterPoint,
    ParametricModel,
    empirical_I,
    empirical_Q,
    expected_I,
    expected_Q,
    get_model,
    hessian,
    linexp_density,
    linexp_sample,
    loglik,
    score,
)
from .numerics import QuadratureSpec, RngStream
from .simulate import (
    CoverageReport,
    CoverageSpec,
    NormalityDiagnostic,
    RateProbe,
    coverage_study,
    derive_seed,
    normality_diagnostic,
    rate_probe,
)
from .statistics import (
    KINDS,
    SINGULAR_BAND,
    StatisticEvaluator,
    StatisticSet,
    rstar,
    signed_lrt,
    statistic_set,
    u_bar,
    u_hat,
)

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "BracketPolicy",
    "ConstrainedFit",
    "CovarianceBundle",
    "CovarianceError",
    "CoverageReport",
    "CoverageSpec",
    "DataError",
    "Dataset",
    "DATASET_IDS",
    "DomainError",
    "FitError",
    "FitResult",
    "InconsistentFitError",
    "InvalidInputError",
    "KINDS",
    "LimitRequest",
    "LimitResult",
    "LinearExponentialModel",
    "MODEL_IDS",
    "NormalModel",
    "NormalityDiagnostic",
    "ParameterPoint",
    "ParametricModel",
    "QuadratureError",
    "QuadratureSpec",
    "RateProbe",
    "RngStream",
    "SINGULAR_BAND",
    "SignedRootError",
    "SignedRootEstimator",
    "SingularMatrixError",
    "SingularityError",
    "StatisticEvaluator",
    "StatisticSet",
    "coverage_study",
    "derive_seed",
    "empirical_I",
    "empirical_Q",
    "expected_I",
    "expected_Q",
    "fit_constrained",
    "fit_full",
    "get_dataset",
    "get_model",
    "hessian",
    "leukemia21",
    "linexp_density",
    "linexp_sample",
    "loglik",
    "normality_diagnostic",
    "p_value",
    "profile_loglik",
    "rate_probe",
    "rstar",
    "score",
    "signed_lrt",
    "statistic_set",
    "two_sided_interval",
    "u_bar",
    "u_hat",
    "upper_limit",
]
