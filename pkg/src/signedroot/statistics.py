"""The signed likelihood root and its covariance-adjusted modifications.

R is the signed square root of twice the likelihood-ratio drop at a fixed
interest value. The adjusted quantities replace an exact but uncomputable
ingredient with likelihood covariances:

- the expected variant uses model expectations of score and log-likelihood
  products, evaluated under the full-data fit, and
- the empirical variant substitutes per-observation sums for the same
  expectations.

Either U enters the modification r + log(u/r)/r, whose singularity at r = 0
is removable. Inside a narrow band around r = 0 the modified statistic is
evaluated by quadratic interpolation across the band rather than by the raw
formula, which loses all precision there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    BracketError,
    CovarianceError,
    FitError,
    InconsistentFitError,
    InvalidInputError,
    SignedRootError,
    SingularityError,
    SingularMatrixError,
)
from .fitting import ConstrainedFit, FitResult, fit_constrained
from .models import CovarianceBundle, Dataset, ParametricModel
from .numerics import DEFAULT_QUADRATURE, QuadratureSpec, brent_root, determinant, solve

__all__ = ["StatisticSet", "StatisticEvaluator", "signed_lrt", "u_bar",
           "u_hat", "rstar", "statistic_set", "SINGULAR_BAND", "KINDS"]

SINGULAR_BAND = 1e-2
LOGLIK_SLACK = 1e-9
KINDS = ("R", "Rbar", "Rhat")


@dataclass(frozen=True)
class StatisticSet:
    """All three statistics at one interest value, plus evaluation notes."""

    psi: float
    r: float
    u_bar: float
    u_hat: float
    rbar_star: float
    rhat_star: float
    near_singular: bool
    diagnostics: dict


def signed_lrt(full: FitResult, constrained: ConstrainedFit) -> float:
    """Signed root of twice the log-likelihood drop at the constrained fit."""
    if not (full.converged and constrained.converged):
        raise FitError("signed root requires converged fits")
    drop = full.loglik - constrained.loglik
    if drop < -LOGLIK_SLACK:
        raise InconsistentFitError(
            f"profile log-likelihood exceeds the maximum by {-drop:.3e}"
        )
    return float(np.sign(full.theta_hat.psi - constrained.psi)
                 * np.sqrt(2.0 * max(drop, 0.0)))


def _u_value(bundle: CovarianceBundle, full: FitResult,
             constrained: ConstrainedFit) -> float:
    """Determinant assembly shared by both covariance variants.

    Row 1 is the difference of log-likelihood/score covariance rows between
    the full and constrained fits; the remaining rows are the nuisance rows
    of the score cross-covariance. All rows are multiplied by i^{-1} J, and
    the determinant is normalized by the observed-information determinants.
    The sign is forced to the sign of R afterwards.
    """
    theta_hat = full.theta_hat.as_array()
    theta_psi = constrained.theta.as_array()
    i_mat = bundle.i
    try:
        np.linalg.cholesky(i_mat)
    except np.linalg.LinAlgError:
        raise CovarianceError(
            f"{bundle.variant} score covariance at the full fit is not "
            "positive definite"
        ) from None
    det_j = determinant(full.observed_info)
    det_jlam = determinant(constrained.j_lam)
    if det_j <= 0.0 or det_jlam <= 0.0:
        raise FitError("observed-information determinants must be positive")
    try:
        i_inv_j = solve(i_mat, full.observed_info)
    except SingularMatrixError as exc:
        raise CovarianceError(
            f"{bundle.variant} score covariance is numerically singular "
            f"(condition {exc.condition:.2e})"
        ) from None
    q_hat = bundle.Q_at(theta_hat, theta_hat)
    q_psi = bundle.Q_at(theta_psi, theta_hat)
    big_i = bundle.I_at(theta_psi, theta_hat)
    top = (q_hat - q_psi) @ i_inv_j
    rest = (big_i @ i_inv_j)[1:, :]
    u = determinant(np.vstack([top, rest])) / np.sqrt(det_jlam * det_j)
    sgn = np.sign(full.theta_hat.psi - constrained.psi)
    return float(abs(u) * sgn) if sgn != 0.0 else float(u)


def u_bar(model: ParametricModel, data: Dataset, full: FitResult,
          constrained: ConstrainedFit,
          quadrature: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """U assembled from model-expected covariances at the full fit."""
    bundle = CovarianceBundle("expected", model, data,
                              full.theta_hat.as_array(), quadrature)
    return _u_value(bundle, full, constrained)


def u_hat(model: ParametricModel, data: Dataset, full: FitResult,
          constrained: ConstrainedFit) -> float:
    """U assembled from per-observation empirical covariance sums."""
    bundle = CovarianceBundle("empirical", model, data,
                              full.theta_hat.as_array())
    return _u_value(bundle, full, constrained)


def rstar(r: float, u: float, band: float = SINGULAR_BAND) -> float:
    """The modification r + log(u/r)/r, defined outside the singular band.

    Inside |r| <= band the raw formula is hopeless numerically; callers get
    an error directing them to the interpolated path (statistic_set and the
    evaluator provide it).
    """
    if not band > 0.0:
        raise InvalidInputError("band must be positive")
    r = float(r)
    u = float(u)
    if abs(r) <= band:
        raise SingularityError(
            f"|r| = {abs(r):.3e} is inside the singular band {band:.0e}; "
            "use the interpolated evaluation"
        )
    ratio = u / r
    if ratio <= 0.0:
        raise SingularityError(
            f"u/r = {ratio:.3e} outside the singular band; upstream fits or "
            "covariances are unreliable"
        )
    return float(r + np.log(ratio) / r)


class StatisticEvaluator:
    """Caches fits and covariance pieces for repeated evaluations.

    Root finding and interpolation evaluate the statistics many times at
    nearby interest values; this object keeps the full fit, both covariance
    bundles and every constrained fit seen so far, warm-starting each new
    constrained fit from the nearest cached one. Confine an instance to a
    single thread.
    """

    def __init__(self, model: ParametricModel, data: Dataset, full: FitResult,
                 band: float = SINGULAR_BAND,
                 quadrature: QuadratureSpec = DEFAULT_QUADRATURE):
        if not band > 0.0:
            raise InvalidInputError("band must be positive")
        self.model = model
        self.data = data
        self.full = full
        self.band = float(band)
        theta_hat = full.theta_hat.as_array()
        self._bundles = {
            "expected": CovarianceBundle("expected", model, data, theta_hat,
                                         quadrature),
            "empirical": CovarianceBundle("empirical", model, data, theta_hat),
        }
        self._fits: dict = {}
        self._nodes: dict = {}

    # -- constrained fits ----------------------------------------------------
    def _warm_startable(self, fit: ConstrainedFit) -> bool:
        # a nuisance coordinate pinned at the positivity floor would pass the
        # transformed-gradient test immediately; never warm-start from there
        th = fit.theta.as_array()
        for i, t in enumerate(self.model.transforms):
            if i >= 1 and t == "log" and th[i] <= 1e-15:
                return False
        return True

    def constrained(self, psi: float) -> ConstrainedFit:
        psi = float(psi)
        hit = self._fits.get(psi)
        if hit is not None:
            return hit
        init = None
        usable = [p for p, f in self._fits.items() if self._warm_startable(f)]
        if usable:
            nearest = min(usable, key=lambda p: abs(p - psi))
            init = self._fits[nearest].theta
        fit = fit_constrained(self.model, self.data, psi, init=init)
        self._fits[psi] = fit
        return fit

    def r_at(self, psi: float) -> float:
        return signed_lrt(self.full, self.constrained(psi))

    def u_at(self, psi: float, variant: str) -> float:
        return _u_value(self._bundles[variant], self.full,
                        self.constrained(psi))

    # -- modified statistics ---------------------------------------------------
    def _profile_scale(self) -> float:
        # local curvature of the profile, from the observed information;
        # converts R-units to psi-units for brackets and initial guesses
        j_inv_00 = float(np.linalg.inv(self.full.observed_info)[0, 0])
        if j_inv_00 <= 0.0 or not np.isfinite(j_inv_00):
            return max(abs(self.full.theta_hat.psi), 1.0)
        return float(np.sqrt(j_inv_00))

    def psi_at_r(self, target: float) -> float:
        """Solve r_at(psi) = target; R is decreasing in psi."""
        psi_hat = self.full.theta_hat.psi
        if target == 0.0:
            return psi_hat
        scale = self._profile_scale()
        width = abs(target) * scale
        lo, hi = None, None
        side = -1.0 if target > 0.0 else 1.0  # psi moves opposite to R
        inner, f_inner = psi_hat, -target
        for grow in range(60):
            cand = psi_hat + side * width * 2.0 ** grow
            try:
                f_cand = self.r_at(cand) - target
            except SignedRootError:
                # outside the admissible range: bisect back toward psi_hat
                cand = 0.5 * (cand + inner)
                try:
                    f_cand = self.r_at(cand) - target
                except SignedRootError:
                    continue
            if np.sign(f_cand) != np.sign(f_inner):
                lo, hi = sorted((inner, cand))
                break
            inner, f_inner = cand, f_cand
        if lo is None:
            raise BracketError(f"could not bracket R = {target} in psi")
        return brent_root(lambda p: self.r_at(p) - target, lo, hi, tol=1e-9)

    def _band_nodes(self, sign_hint: float):
        """Three (r, psi) nodes straddling the band, keyed by the mirror side."""
        b = self.band
        targets = (-2.0 * b, -b, b) if sign_hint < 0.0 else (-b, b, 2.0 * b)
        key = targets[0]
        if key not in self._nodes:
            self._nodes[key] = [(t, self.psi_at_r(t)) for t in targets]
        return self._nodes[key]

    def _interp(self, r: float, variant: str) -> float:
        nodes = self._band_nodes(np.sign(r) if r != 0.0 else 1.0)
        rs, vals = [], []
        for t, psi_t in nodes:
            r_t = self.r_at(psi_t)
            rs.append(r_t)
            vals.append(rstar(r_t, self.u_at(psi_t, variant), self.band * 0.5))
        out = 0.0
        for i in range(3):
            li = 1.0
            for j in range(3):
                if j != i:
                    li *= (r - rs[j]) / (rs[i] - rs[j])
            out += vals[i] * li
        return out

    def modified(self, psi: float, variant: str) -> float:
        r = self.r_at(psi)
        if abs(r) > self.band:
            return rstar(r, self.u_at(psi, variant), self.band)
        return self._interp(r, variant)

    def statistic(self, kind: str, psi: float) -> float:
        if kind == "R":
            return self.r_at(psi)
        if kind == "Rbar":
            return self.modified(psi, "expected")
        if kind == "Rhat":
            return self.modified(psi, "empirical")
        raise InvalidInputError(f"unknown statistic kind {kind!r}; "
                                f"expected one of {', '.join(KINDS)}")


def statistic_set(model: ParametricModel, data: Dataset, full: FitResult,
                  psi: float, band: float = SINGULAR_BAND,
                  quadrature: QuadratureSpec = DEFAULT_QUADRATURE) -> StatisticSet:
    """Evaluate R, both U variants and both modified roots at one psi."""
    ev = StatisticEvaluator(model, data, full, band=band, quadrature=quadrature)
    r = ev.r_at(psi)
    ub = ev.u_at(psi, "expected")
    uh = ev.u_at(psi, "empirical")
    near = abs(r) <= band
    if near:
        how = f"quadratic interpolation across |R| <= {band:g}"
        rbar = ev._interp(r, "expected")
        rhat = ev._interp(r, "empirical")
    else:
        how = "direct formula"
        rbar = rstar(r, ub, band)
        rhat = rstar(r, uh, band)
    return StatisticSet(
        psi=float(psi),
        r=r,
        u_bar=ub,
        u_hat=uh,
        rbar_star=rbar,
        rhat_star=rhat,
        near_singular=near,
        diagnostics={"R": "direct formula", "Rbar": how, "Rhat": how},
    )
