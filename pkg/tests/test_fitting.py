import numpy as np
import pytest

from signedroot.exceptions import DomainError
from signedroot.fitting import fit_constrained, fit_full, profile_loglik
from signedroot.models import Dataset, linexp_sample
from signedroot.numerics import RngStream

import fixtures as fx


def test_normal_fit_closed_form(normal):
    y = np.array([2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0])
    fit = fit_full(normal, Dataset.of(y))
    mu = float(y.mean())
    sigma = float(np.sqrt(np.mean((y - mu) ** 2)))
    assert fit.converged
    assert fit.theta_hat.values[0] == pytest.approx(mu, abs=1e-8)
    assert fit.theta_hat.values[1] == pytest.approx(sigma, abs=1e-8)


def test_case_study_fit(full_fit):
    assert full_fit.converged
    assert full_fit.theta_hat.values[0] == pytest.approx(fx.PSI_HAT, rel=1e-9)
    assert full_fit.theta_hat.values[1] == pytest.approx(fx.LAM_HAT, rel=1e-9)
    assert full_fit.loglik == pytest.approx(fx.LOGLIK_HAT, abs=1e-9)
    np.testing.assert_allclose(full_fit.observed_info, fx.OBSERVED_INFO, rtol=1e-8)


def test_large_sample_recovers_truth(linexp):
    theta = (0.1, 0.01)
    y = linexp_sample(theta[0], theta[1], 10_000, RngStream(2024))
    fit = fit_full(linexp, Dataset.of(y))
    se = np.sqrt(np.diag(np.linalg.inv(fit.observed_info)))
    err = np.abs(np.asarray(fit.theta_hat.values) - np.asarray(theta))
    assert np.all(err < 3.0 * se)


def test_constrained_at_mle_reproduces_full(linexp, leukemia, full_fit):
    con = fit_constrained(linexp, leukemia, full_fit.theta_hat.psi)
    assert con.converged
    assert con.theta.values[1] == pytest.approx(full_fit.theta_hat.values[1],
                                                rel=1e-7)
    assert con.loglik == pytest.approx(full_fit.loglik, abs=1e-10)


def test_normal_constrained_closed_form(normal):
    y = np.array([1.0, 2.0, 2.0, 3.5, 6.0])
    mu0 = 2.2
    con = fit_constrained(normal, Dataset.of(y), mu0)
    expect = float(np.sqrt(np.mean((y - mu0) ** 2)))
    assert con.theta.values[1] == pytest.approx(expect, rel=1e-10)


def test_case_study_constrained(linexp, leukemia):
    con = fit_constrained(linexp, leukemia, 0.05)
    assert con.converged
    assert con.psi == 0.05
    assert con.theta.values[0] == pytest.approx(0.05, rel=1e-14)
    assert con.theta.values[1] == pytest.approx(fx.LAM_PSI_005, rel=1e-9)
    assert con.loglik == pytest.approx(fx.PROFILE_005, abs=1e-9)
    assert con.j_lam[0, 0] > 0.0


def test_profile_below_maximum(linexp, leukemia, full_fit):
    for psi in np.linspace(0.03, 0.20, 18):
        assert profile_loglik(linexp, leukemia, float(psi)) <= (
            full_fit.loglik + 1e-9)


def test_profile_concave(linexp, leukemia):
    grid = np.linspace(0.03, 0.20, 18)
    values = np.array([profile_loglik(linexp, leukemia, float(p)) for p in grid])
    second = np.diff(values, 2)
    assert np.all(second < 1e-9)


def test_fit_initialization_robust(linexp, leukemia, full_fit):
    rng = np.random.default_rng(8)
    target = np.asarray(full_fit.theta_hat.values)
    for _ in range(20):
        init = (float(rng.uniform(0.01, 0.5)), float(rng.uniform(1e-4, 0.05)))
        fit = fit_full(linexp, leukemia, init=init)
        np.testing.assert_allclose(fit.theta_hat.values, target, rtol=1e-6)


def test_warm_start_matches_cold(linexp, leukemia):
    cold = fit_constrained(linexp, leukemia, 0.06)
    neighbor = fit_constrained(linexp, leukemia, 0.055)
    warm = fit_constrained(linexp, leukemia, 0.06, init=neighbor.theta.values)
    assert warm.theta.values[1] == pytest.approx(cold.theta.values[1], rel=1e-8)
    assert warm.loglik == pytest.approx(cold.loglik, abs=1e-10)


def test_constrained_rejects_bad_psi(linexp, leukemia):
    with pytest.raises(DomainError):
        fit_constrained(linexp, leukemia, -0.05)
