import numpy as np
import pytest

from signedroot.datasets import DATASET_IDS, get_dataset, leukemia21
from signedroot.exceptions import DataError, DomainError, InvalidInputError
from signedroot.models import (
    Dataset,
    MODEL_IDS,
    _linexp_transform,
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
from signedroot.numerics import RngStream

import fixtures as fx


def test_registry():
    assert MODEL_IDS == ("linexp", "normal")
    with pytest.raises(InvalidInputError):
        get_model("weibull")


def test_builtin_dataset():
    assert DATASET_IDS == ("leukemia21",)
    data = leukemia21()
    assert data.n == 21
    assert data.observations == fx.LEUKEMIA_Y
    assert get_dataset("leukemia21").observations == data.observations
    with pytest.raises(InvalidInputError):
        get_dataset("nope")


def test_loglik_single_point(linexp):
    value = loglik(linexp, (1.0, 1.0), Dataset.of([1.0]))
    assert value == pytest.approx(np.log(2.0) - 1.5, abs=1e-12)


def test_loglik_permutation_invariant(linexp, leukemia):
    shuffled = Dataset.of(np.random.default_rng(3).permutation(leukemia.observations))
    a = loglik(linexp, (0.1, 0.01), leukemia)
    b = loglik(linexp, (0.1, 0.01), shuffled)
    assert a == pytest.approx(b, abs=1e-10)


def test_normal_loglik_at_mle(normal):
    y = np.array([1.0, 3.0, 4.0, 4.5, 7.0])
    n = len(y)
    mu = float(y.mean())
    s2 = float(np.mean((y - mu) ** 2))
    expect = -0.5 * n * np.log(2.0 * np.pi * s2) - 0.5 * n
    assert loglik(normal, (mu, np.sqrt(s2)), Dataset.of(y)) == pytest.approx(
        expect, abs=1e-10)


def test_normal_mean_score_vanishes(normal):
    y = np.array([0.2, 1.4, -0.7, 2.5])
    g = score(normal, (float(y.mean()), 1.3), Dataset.of(y))
    assert g[0] == pytest.approx(0.0, abs=1e-12)


def test_score_small_at_mle(linexp, leukemia):
    g = score(linexp, (fx.PSI_HAT, fx.LAM_HAT), leukemia)
    assert np.max(np.abs(g)) < 1e-6 * leukemia.n


def test_hessian_symmetric(linexp, leukemia):
    h = hessian(linexp, (0.08, 0.003), leukemia)
    assert h[0, 1] == h[1, 0]


def test_domain_rejected(linexp, leukemia):
    with pytest.raises(DomainError):
        loglik(linexp, (-0.1, 0.01), leukemia)
    with pytest.raises(DomainError):
        loglik(linexp, (0.1, 0.0), leukemia)


def test_support_rejected(linexp):
    with pytest.raises(DataError):
        loglik(linexp, (0.1, 0.01), Dataset.of([1.0, -2.0]))


def test_normal_expected_information(normal):
    # per observation: diag(1/sigma^2, 2/sigma^2)
    i = expected_I(normal, (0.3, 1.0), (0.3, 1.0))
    np.testing.assert_allclose(i, [[1.0, 0.0], [0.0, 2.0]], atol=1e-12)
    i2 = expected_I(normal, (0.0, 2.0), (0.0, 2.0), n=10)
    np.testing.assert_allclose(i2, [[2.5, 0.0], [0.0, 5.0]], atol=1e-12)


def test_normal_expected_q_first_coordinate(normal):
    q = expected_Q(normal, (0.0, 1.0), (0.0, 1.0))
    assert q[0] == pytest.approx(0.0, abs=1e-12)


def test_expected_information_symmetric(linexp):
    i = expected_I(linexp, (0.1, 0.01), (0.1, 0.01))
    assert abs(i[0, 1] - i[1, 0]) < 1e-9


def test_expected_matches_reference(linexp):
    theta = (fx.PSI_HAT, fx.LAM_HAT)
    i = expected_I(linexp, theta, theta, n=21)
    np.testing.assert_allclose(i, fx.I_HAT_EXPECTED, rtol=1e-8)
    q = expected_Q(linexp, theta, theta, n=21)
    np.testing.assert_allclose(q, fx.Q_HAT_EXPECTED, rtol=1e-8)


def test_empirical_single_observation(linexp):
    data = Dataset.of([5.0])
    th = (0.1, 0.01)
    t0 = (0.12, 0.02)
    s_t = score(linexp, th, data)
    s_0 = score(linexp, t0, data)
    np.testing.assert_allclose(empirical_I(linexp, th, t0, data),
                               np.outer(s_t, s_0), atol=1e-14)
    np.testing.assert_allclose(empirical_Q(linexp, th, t0, data),
                               loglik(linexp, th, data) * s_0, atol=1e-14)


def test_empirical_information_psd(linexp, leukemia):
    th = (0.09, 0.002)
    i = empirical_I(linexp, th, th, leukemia)
    assert np.min(np.linalg.eigvalsh(i)) > -1e-10


def test_density_normalized_and_positive():
    y = np.linspace(0.01, 50.0, 200)
    f = linexp_density(y, 0.2, 0.005)
    assert np.all(f > 0.0)


def test_sampler_rejects_bad_arguments():
    with pytest.raises(DomainError):
        linexp_sample(0.0, 1.0, 4, RngStream(1))
    with pytest.raises(InvalidInputError):
        linexp_sample(0.1, 0.01, 0, RngStream(1))


def test_transform_limit_without_linear_term():
    # psi = 0 leaves y = sqrt(2 t / lam)
    assert _linexp_transform(np.array([0.5]), 0.0, 1.0)[0] == pytest.approx(
        1.0, abs=1e-14)


def test_sampler_deterministic():
    a = linexp_sample(0.1, 0.01, 100, RngStream(17, 4))
    b = linexp_sample(0.1, 0.01, 100, RngStream(17, 4))
    np.testing.assert_array_equal(a, b)


def test_sampler_matches_cdf():
    psi, lam = 0.1, 0.01
    y = linexp_sample(psi, lam, 100_000, RngStream(123))
    assert np.all(y > 0.0)
    u = np.sort(1.0 - np.exp(-(psi * y + lam * y * y / 2.0)))
    k = len(u)
    grid = np.arange(1, k + 1) / k
    ks = float(np.max(np.maximum(np.abs(grid - u), np.abs(u - (grid - 1.0 / k)))))
    assert ks < 1.5 * 1.36 / np.sqrt(k)
