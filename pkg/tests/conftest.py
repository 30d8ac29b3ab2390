import pytest

from signedroot import StatisticEvaluator, fit_full, get_dataset, get_model
from signedroot.simulate import CoverageSpec, coverage_study

import fixtures as fx

# one fixed seed for every acceptance-scale simulation in the suite
ACCEPTANCE_SEED = 7


@pytest.fixture(scope="session")
def linexp():
    return get_model("linexp")


@pytest.fixture(scope="session")
def normal():
    return get_model("normal")


@pytest.fixture(scope="session")
def leukemia():
    return get_dataset("leukemia21")


@pytest.fixture(scope="session")
def full_fit(linexp, leukemia):
    return fit_full(linexp, leukemia)


@pytest.fixture(scope="session")
def evaluator(linexp, leukemia, full_fit):
    return StatisticEvaluator(linexp, leukemia, full_fit)


@pytest.fixture(scope="session")
def coverage_desk():
    """Desk-scale coverage study, shared across acceptance criteria."""
    return coverage_study(CoverageSpec(
        "linexp", (fx.PSI_HAT, fx.LAM_HAT), 21, 20000,
        master_seed=ACCEPTANCE_SEED, workers=4))


@pytest.fixture(scope="session")
def coverage_full():
    """Full-scale coverage study, shared across acceptance criteria."""
    return coverage_study(CoverageSpec(
        "linexp", (fx.PSI_HAT, fx.LAM_HAT), 21, 100000,
        master_seed=ACCEPTANCE_SEED, workers=4))
