"""Confidence limits and p-values by inverting the signed-root statistics.

Every statistic here is decreasing in the interest value, so the upper
limit at probability p is the unique root of statistic(psi) = z_{1-p}. The
bracket grows geometrically away from the full-fit estimate on the side the
target quantile dictates, then Brent's method finishes the job.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .exceptions import BracketError, InvalidInputError, SignedRootError
from .fitting import fit_full
from .models import Dataset, ParametricModel
from .numerics import brent_root, normal_cdf, normal_quantile
from .statistics import KINDS, StatisticEvaluator

__all__ = ["BracketPolicy", "LimitRequest", "LimitResult", "upper_limit",
           "p_value", "two_sided_interval"]

ROOT_TOL = 1e-7


@dataclass(frozen=True)
class BracketPolicy:
    """How the root bracket expands away from the point estimate."""

    initial_fraction: float = 0.1
    growth: float = 2.0
    max_expansions: int = 60

    def __post_init__(self):
        if not self.initial_fraction > 0.0:
            raise InvalidInputError("initial_fraction must be positive")
        if not self.growth > 1.0:
            raise InvalidInputError("growth must exceed 1")
        if self.max_expansions < 1:
            raise InvalidInputError("max_expansions must be >= 1")


DEFAULT_BRACKET = BracketPolicy()


@dataclass(frozen=True)
class LimitRequest:
    """One upper-limit query: which statistic, which probability, how to
    hunt for the bracket."""

    kind: str
    p: float
    policy: BracketPolicy = field(default_factory=BracketPolicy)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(
                f"unknown statistic kind {self.kind!r}; expected one of {list(KINDS)}"
            )
        if not 0.0 < self.p < 1.0:
            raise InvalidInputError(f"probability must lie in (0, 1), got {self.p}")


@dataclass(frozen=True)
class LimitResult:
    """A solved limit: the interest value, the statistic achieved there, and
    how many statistic evaluations the root search spent."""

    psi: float
    statistic_value: float
    iterations: int


def _evaluator(model, data, evaluator):
    if evaluator is not None:
        return evaluator
    return StatisticEvaluator(model, data, fit_full(model, data))


def upper_limit(model: ParametricModel, data: Dataset, kind: str, p: float,
                policy: BracketPolicy = DEFAULT_BRACKET,
                evaluator: StatisticEvaluator | None = None) -> LimitResult:
    """Solve statistic(psi) = normal_quantile(1 - p) for psi.

    The statistic is decreasing in psi, so p > 1/2 puts the limit above the
    full-fit estimate and p < 1/2 below it. Pass an evaluator to share
    cached fits across several limit computations on the same data.
    """
    request = LimitRequest(kind, float(p), policy)
    ev = _evaluator(model, data, evaluator)
    target = float(normal_quantile(1.0 - request.p))
    psi_hat = ev.full.theta_hat.psi
    calls = [0]

    def f(psi):
        calls[0] += 1
        return ev.statistic(request.kind, psi) - target

    if target == 0.0:
        return LimitResult(psi=psi_hat, statistic_value=0.0, iterations=0)

    base = policy.initial_fraction * abs(psi_hat)
    if base == 0.0:
        base = policy.initial_fraction * ev._profile_scale()
    side = 1.0 if target < 0.0 else -1.0
    inner, f_inner = psi_hat, -target
    lo = hi = None
    offset = base
    for _ in range(policy.max_expansions):
        cand = psi_hat + side * offset
        offset *= policy.growth
        try:
            f_cand = f(cand)
        except SignedRootError:
            # stepped outside the admissible range; try the midpoint instead
            cand = 0.5 * (cand + inner)
            try:
                f_cand = f(cand)
            except SignedRootError:
                continue
        if f_cand == 0.0:
            return LimitResult(psi=float(cand), statistic_value=target,
                               iterations=calls[0])
        if (f_cand > 0.0) != (f_inner > 0.0):
            lo, hi = sorted((inner, cand))
            break
        inner, f_inner = cand, f_cand
    if lo is None:
        raise BracketError(
            f"no sign change for the {request.kind} limit at p={request.p} "
            f"within {policy.max_expansions} expansions from {psi_hat!r}"
        )
    root = brent_root(f, lo, hi, tol=ROOT_TOL)
    achieved = ev.statistic(request.kind, root)
    return LimitResult(psi=float(root), statistic_value=float(achieved),
                       iterations=calls[0])


def p_value(model: ParametricModel, data: Dataset, kind: str, psi0: float,
            evaluator: StatisticEvaluator | None = None) -> float:
    """Lower-tail normal probability of the statistic at psi0."""
    if kind not in KINDS:
        raise InvalidInputError(
            f"unknown statistic kind {kind!r}; expected one of {list(KINDS)}"
        )
    ev = _evaluator(model, data, evaluator)
    return float(normal_cdf(ev.statistic(kind, float(psi0))))


def two_sided_interval(model: ParametricModel, data: Dataset, kind: str,
                       level: float,
                       evaluator: StatisticEvaluator | None = None):
    """Equal-tailed interval from two upper limits at (1 -+ level)/2."""
    if not 0.0 < level < 1.0:
        raise InvalidInputError(f"level must lie in (0, 1), got {level}")
    ev = _evaluator(model, data, evaluator)
    lower = upper_limit(model, data, kind, (1.0 - level) / 2.0, evaluator=ev)
    upper = upper_limit(model, data, kind, (1.0 + level) / 2.0, evaluator=ev)
    return lower.psi, upper.psi
