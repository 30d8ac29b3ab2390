"""Estimator-style wrapper around the fitting and inference pipeline.

SignedRootEstimator follows the fit/get_params conventions so it can sit in
standard tooling (cloning, grid inspection, pipelines that end in a scorer).
There is no predict or transform: the object estimates parameters and
inverts test statistics, it does not map samples to outputs. score() is the
average per-observation log-likelihood under the fitted parameters, the
usual density-model convention.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import InvalidInputError
from .inference import p_value, two_sided_interval, upper_limit
from .models import Dataset, get_model
from .statistics import KINDS, StatisticEvaluator, statistic_set
from .fitting import fit_full

__all__ = ["SignedRootEstimator"]


class SignedRootEstimator(BaseEstimator):
    """Likelihood inference for the leading parameter of a built-in model.

    Parameters
    ----------
    model : str, default "linexp"
        Built-in model id ("linexp" or "normal").
    kind : str, default "Rhat"
        Statistic used by interval/upper_limit/p_value: "R" for the plain
        signed root, "Rbar" for the expected-covariance modification,
        "Rhat" for the empirical one.
    """

    def __init__(self, model: str = "linexp", kind: str = "Rhat"):
        self.model = model
        self.kind = kind

    def _validate_data_vector(self, X) -> np.ndarray:
        arr = check_array(X, ensure_2d=False, dtype=float)
        if arr.ndim == 2:
            if arr.shape[1] != 1:
                raise InvalidInputError(
                    f"expected a single column of observations, got shape {arr.shape}"
                )
            arr = arr[:, 0]
        elif arr.ndim != 1:
            raise InvalidInputError("observations must be a 1-d array or a column")
        return arr

    def fit(self, X, y=None):
        """Fit the model to a vector (or single column) of observations."""
        if self.kind not in KINDS:
            raise InvalidInputError(
                f"unknown statistic kind {self.kind!r}; expected one of {list(KINDS)}"
            )
        model = get_model(self.model)
        arr = self._validate_data_vector(X)
        data = Dataset.of(arr.tolist())
        full = fit_full(model, data)
        self.model_ = model
        self.data_ = data
        self.full_ = full
        self.evaluator_ = StatisticEvaluator(model, data, full)
        self.theta_hat_ = full.theta_hat.as_array()
        self.loglik_ = full.loglik
        self.observed_info_ = full.observed_info
        self.n_features_in_ = 1
        return self

    def score(self, X, y=None) -> float:
        """Mean per-observation log-likelihood of X under the fitted theta."""
        check_is_fitted(self, "theta_hat_")
        arr = self._validate_data_vector(X)
        data = Dataset.of(arr.tolist())
        y_arr = self.model_.require_support(data)
        return float(np.mean(self.model_.loglik_obs(self.theta_hat_, y_arr)))

    def statistic(self, psi: float):
        """All statistics at one interest value, as a StatisticSet."""
        check_is_fitted(self, "theta_hat_")
        return statistic_set(self.model_, self.data_, self.full_, float(psi))

    def upper_limit(self, p: float) -> float:
        check_is_fitted(self, "theta_hat_")
        return upper_limit(self.model_, self.data_, self.kind, p,
                           evaluator=self.evaluator_).psi

    def interval(self, level: float = 0.95):
        check_is_fitted(self, "theta_hat_")
        return two_sided_interval(self.model_, self.data_, self.kind, level,
                                  evaluator=self.evaluator_)

    def p_value(self, psi0: float) -> float:
        check_is_fitted(self, "theta_hat_")
        return p_value(self.model_, self.data_, self.kind, psi0,
                       evaluator=self.evaluator_)
