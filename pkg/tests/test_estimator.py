import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from signedroot.estimator import SignedRootEstimator
from signedroot.exceptions import DataError, InvalidInputError
from signedroot.inference import upper_limit

import fixtures as fx

X = np.asarray(fx.LEUKEMIA_Y)[:, None]


def test_params_roundtrip():
    est = SignedRootEstimator(model="normal", kind="R")
    assert est.get_params() == {"model": "normal", "kind": "R"}
    est.set_params(kind="Rbar")
    assert est.get_params()["kind"] == "Rbar"
    assert clone(est).get_params() == est.get_params()


def test_fit_exposes_state():
    est = SignedRootEstimator()
    assert est.fit(X) is est
    assert est.n_features_in_ == 1
    assert est.theta_hat_[0] == pytest.approx(fx.PSI_HAT, rel=1e-9)
    assert est.theta_hat_[1] == pytest.approx(fx.LAM_HAT, rel=1e-9)
    assert est.loglik_ == pytest.approx(fx.LOGLIK_HAT, abs=1e-9)
    np.testing.assert_allclose(est.observed_info_, fx.OBSERVED_INFO, rtol=1e-8)


def test_fit_accepts_flat_list():
    est = SignedRootEstimator().fit(list(fx.LEUKEMIA_Y))
    assert est.theta_hat_[0] == pytest.approx(fx.PSI_HAT, rel=1e-9)


def test_requires_fit_first():
    with pytest.raises(NotFittedError):
        SignedRootEstimator().upper_limit(0.95)


def test_input_validation():
    with pytest.raises(InvalidInputError):
        SignedRootEstimator().fit(np.ones((3, 2)))
    with pytest.raises(DataError):
        SignedRootEstimator().fit(np.array([[1.0], [-2.0]]))


def test_limits_match_functional_api(linexp, leukemia, evaluator):
    est = SignedRootEstimator(kind="Rhat").fit(X)
    direct = upper_limit(linexp, leukemia, "Rhat", 0.975, evaluator=evaluator)
    assert est.upper_limit(0.975) == pytest.approx(direct.psi, abs=1e-9)


def test_kind_parameter_selects_statistic():
    r_est = SignedRootEstimator(kind="R").fit(X)
    h_est = SignedRootEstimator(kind="Rhat").fit(X)
    assert r_est.upper_limit(0.01) == pytest.approx(
        fx.ORACLE_LIMITS["R"][0.01], abs=1e-5)
    assert h_est.upper_limit(0.01) == pytest.approx(
        fx.ORACLE_LIMITS["Rhat"][0.01], abs=1e-5)


def test_statistic_and_p_value():
    est = SignedRootEstimator().fit(X)
    s = est.statistic(0.05)
    assert s.r == pytest.approx(fx.R_005, rel=1e-9)
    assert s.rhat_star == pytest.approx(fx.RHAT_STAR_005, rel=1e-8)
    # the median property p(psi_hat) = 1/2 belongs to the unmodified root;
    # the modified statistics deliberately move off center there
    r_est = SignedRootEstimator(kind="R").fit(X)
    assert r_est.p_value(r_est.theta_hat_[0]) == pytest.approx(0.5, abs=1e-6)


def test_interval_brackets_mle():
    est = SignedRootEstimator(kind="Rbar").fit(X)
    lo, hi = est.interval(0.95)
    assert lo == pytest.approx(fx.ORACLE_LIMITS["Rbar"][0.025], abs=1e-5)
    assert hi == pytest.approx(fx.ORACLE_LIMITS["Rbar"][0.975], abs=1e-5)
    assert lo < fx.PSI_HAT < hi


def test_score_is_mean_loglik():
    est = SignedRootEstimator().fit(X)
    assert est.score(X) == pytest.approx(fx.LOGLIK_HAT / 21.0, abs=1e-9)
