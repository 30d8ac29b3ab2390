import numpy as np
import pytest
from scipy import stats as st

from signedroot.exceptions import InvalidInputError
from signedroot.inference import p_value, two_sided_interval, upper_limit
from signedroot.models import Dataset
from signedroot.numerics import normal_quantile

import fixtures as fx


def test_median_limit_is_mle(linexp, leukemia, full_fit, evaluator):
    res = upper_limit(linexp, leukemia, "R", 0.5, evaluator=evaluator)
    assert res.psi == pytest.approx(full_fit.theta_hat.psi, abs=1e-6)


def test_limits_match_oracle(linexp, leukemia, evaluator):
    for kind in ("R", "Rbar", "Rhat"):
        for p, expect in fx.ORACLE_LIMITS[kind].items():
            res = upper_limit(linexp, leukemia, kind, p, evaluator=evaluator)
            assert res.psi == pytest.approx(expect, abs=1e-5), (kind, p)


def test_limit_statistic_value(linexp, leukemia, evaluator):
    res = upper_limit(linexp, leukemia, "Rbar", 0.95, evaluator=evaluator)
    assert res.statistic_value == pytest.approx(normal_quantile(0.05), abs=1e-6)
    assert res.iterations > 0


def test_p_value_at_mle(linexp, leukemia, full_fit, evaluator):
    p = p_value(linexp, leukemia, "R", full_fit.theta_hat.psi,
                evaluator=evaluator)
    assert p == pytest.approx(0.5, abs=1e-6)


def test_p_value_at_benchmark_point(linexp, leukemia, evaluator):
    p = p_value(linexp, leukemia, "R", 0.1441, evaluator=evaluator)
    assert p == pytest.approx(0.05, abs=0.005)


def test_limit_p_value_roundtrip(linexp, leukemia, evaluator):
    for p in fx.LEVELS:
        res = upper_limit(linexp, leukemia, "R", p, evaluator=evaluator)
        back = p_value(linexp, leukemia, "R", res.psi, evaluator=evaluator)
        assert back == pytest.approx(1.0 - p, abs=1e-6)
    for kind in ("Rbar", "Rhat"):
        for p in (0.025, 0.95):
            res = upper_limit(linexp, leukemia, kind, p, evaluator=evaluator)
            back = p_value(linexp, leukemia, kind, res.psi, evaluator=evaluator)
            assert back == pytest.approx(1.0 - p, abs=1e-6)


def test_two_sided_interval(linexp, leukemia, evaluator):
    lo, hi = two_sided_interval(linexp, leukemia, "Rbar", 0.95,
                                evaluator=evaluator)
    assert lo == pytest.approx(fx.ORACLE_LIMITS["Rbar"][0.025], abs=1e-5)
    assert hi == pytest.approx(fx.ORACLE_LIMITS["Rbar"][0.975], abs=1e-5)
    assert lo < hi


def test_limits_increasing_in_p(linexp, leukemia, evaluator):
    for kind in ("R", "Rbar", "Rhat"):
        values = [upper_limit(linexp, leukemia, kind, p, evaluator=evaluator).psi
                  for p in fx.LEVELS]
        assert all(a < b for a, b in zip(values, values[1:]))


def test_variants_stay_close(linexp, leukemia, evaluator):
    for p in fx.LEVELS:
        a = upper_limit(linexp, leukemia, "Rbar", p, evaluator=evaluator).psi
        b = upper_limit(linexp, leukemia, "Rhat", p, evaluator=evaluator).psi
        assert abs(a - b) < 0.001


def test_invalid_requests(linexp, leukemia, evaluator):
    with pytest.raises(InvalidInputError):
        upper_limit(linexp, leukemia, "Rtilde", 0.95, evaluator=evaluator)
    with pytest.raises(InvalidInputError):
        upper_limit(linexp, leukemia, "R", 0.0, evaluator=evaluator)
    with pytest.raises(InvalidInputError):
        upper_limit(linexp, leukemia, "R", 1.0, evaluator=evaluator)


def test_evaluator_reuse_is_pure(linexp, leukemia, evaluator):
    fresh = upper_limit(linexp, leukemia, "Rhat", 0.95)
    reused = upper_limit(linexp, leukemia, "Rhat", 0.95, evaluator=evaluator)
    assert reused.psi == pytest.approx(fresh.psi, abs=1e-10)


def test_normal_limit_near_student_t(normal):
    # exact one-sided t limit; the root-based limit agrees to a few per mille
    # of sigma once n is moderate
    y = np.random.default_rng(31).normal(size=50)
    n = len(y)
    res = upper_limit(normal, Dataset.of(y), "R", 0.975)
    s = float(np.std(y, ddof=1))
    t_lim = float(y.mean()) + float(st.t.ppf(0.975, n - 1)) * s / np.sqrt(n)
    assert abs(res.psi - t_lim) < 0.02
