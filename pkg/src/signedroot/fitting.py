"""Full and constrained maximum likelihood by Newton ascent.

The optimizer runs in unconstrained coordinates: each parameter moves on the
scale the model declares ("log" for positive parameters, "identity"
otherwise). Gradients and Hessians are chain-ruled onto that scale, the
Newton direction is safeguarded by a ridge and a backtracking line search,
and the reported information matrices are back in original coordinates,
which is where the signed-root formulas live.

Log coordinates are clipped at LOG_FLOOR. A parameter whose constrained
optimum sits on the positivity boundary drifts to the floor, where its
transformed gradient vanishes; the ordinary convergence test then applies
unchanged, with no special boundary casing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DataError, FitError, InvalidInputError, SingularMatrixError
from .models import Dataset, ParameterPoint, ParametricModel, _theta_array
from .numerics import solve

__all__ = ["FitResult", "ConstrainedFit", "fit_full", "fit_constrained",
           "profile_loglik"]

# fixed, not per-call configurable: golden fixtures depend on them
MAX_ITER = 200
SCORE_TOL = 1e-8
STEP_TOL = 1e-10
LOG_FLOOR = -44.0
LOG_CEIL = 44.0
STEP_CAP = 2.0
ARMIJO = 1e-4


@dataclass(frozen=True)
class FitResult:
    """Unconstrained maximum likelihood fit.

    observed_info is -loglik_hessian at theta_hat in original coordinates;
    gradient_norm is the max-norm of the optimizer-scale gradient that the
    convergence test used.
    """

    theta_hat: ParameterPoint
    loglik: float
    observed_info: np.ndarray
    gradient_norm: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class ConstrainedFit:
    """Maximum likelihood fit with the interest coordinate held at psi.

    j_lam is the nuisance block of -loglik_hessian at theta_psi in original
    coordinates; loglik is the profile log-likelihood value.
    """

    psi: float
    theta: ParameterPoint
    loglik: float
    j_lam: np.ndarray
    gradient_norm: float
    iterations: int
    converged: bool


def _to_z(theta, transforms):
    z = np.array(theta, dtype=float)
    for i, t in enumerate(transforms):
        if t == "log":
            z[i] = np.log(theta[i])
    return z


def _to_theta(z, transforms):
    th = np.array(z, dtype=float)
    for i, t in enumerate(transforms):
        if t == "log":
            th[i] = np.exp(z[i])
    return th


def _clip_z(z, transforms):
    out = np.array(z, dtype=float)
    for i, t in enumerate(transforms):
        if t == "log":
            out[i] = min(max(out[i], LOG_FLOOR), LOG_CEIL)
    return out


def _z_gradient(g_theta, theta, transforms):
    g = np.array(g_theta, dtype=float)
    for i, t in enumerate(transforms):
        if t == "log":
            g[i] *= theta[i]
    return g


def _z_hessian(h_theta, g_theta, theta, transforms):
    d = np.ones_like(theta)
    for i, t in enumerate(transforms):
        if t == "log":
            d[i] = theta[i]
    h = d[:, None] * h_theta * d[None, :]
    for i, t in enumerate(transforms):
        if t == "log":
            # second derivative of theta_i = exp(z_i) is theta_i itself
            h[i, i] += g_theta[i] * theta[i]
    return h


def _scaled_solve(a, g):
    """Solve a @ x = g, Jacobi-rescaling first when the diagonal allows it.

    The rescale matters: a transformed hessian can be well posed yet wildly
    ill scaled (a log coordinate walking toward a boundary shrinks its row
    geometrically), and the raw solve refuses on condition number alone.
    """
    diag = np.diag(a)
    if np.all(diag > 0.0):
        p = 1.0 / np.sqrt(diag)
        try:
            return p * solve(p[:, None] * a * p[None, :], p * g)
        except SingularMatrixError:
            pass
    try:
        return solve(a, g)
    except SingularMatrixError:
        return None


def _ascent_direction(neg_h, g):
    """Newton direction made safe for ascent; None means use steepest.

    An indefinite matrix is shifted by its most negative eigenvalue plus a
    small relative margin, which preserves the scale of the step along the
    flat coordinate instead of flooring it with an absolute ridge.
    """
    k = len(g)
    eye = np.eye(k)
    try:
        lam_min = float(np.linalg.eigvalsh(neg_h)[0])
    except np.linalg.LinAlgError:
        lam_min = -float(np.max(np.abs(neg_h)))
    mu = 0.0 if lam_min > 0.0 else abs(lam_min) * (1.0 + 1e-4)
    for _ in range(60):
        shifted = neg_h if mu == 0.0 else neg_h + mu * eye
        step = _scaled_solve(shifted, g)
        if step is not None and np.all(np.isfinite(step)) and float(step @ g) > 0:
            return step
        floor = 1e-12 * max(1.0, float(np.max(np.abs(neg_h))))
        mu = max(2.0 * mu, floor)
    return None


def _newton(model, y, theta0, active, max_iter=MAX_ITER):
    """Maximize the log-likelihood over theta[active], other coords fixed.

    Returns (theta, loglik, z_gradient_norm, iterations). Raises FitError
    with a short trace when the ascent stalls before meeting the tolerances.
    """
    transforms = model.transforms
    z = _clip_z(_to_z(theta0, transforms), transforms)
    theta = _to_theta(z, transforms)
    lval = float(np.sum(model.loglik_obs(theta, y)))
    if not np.isfinite(lval):
        raise FitError(f"log-likelihood not finite at the start point {tuple(theta)}")
    last_step = np.inf
    trace = []
    for it in range(1, max_iter + 1):
        g_theta = np.sum(model.score_obs(theta, y), axis=0)
        h_theta = np.sum(model.hessian_obs(theta, y), axis=0)
        h_theta = 0.5 * (h_theta + h_theta.T)
        g_z = _z_gradient(g_theta, theta, transforms)[active]
        gnorm = float(np.max(np.abs(g_z)))
        trace.append((it, lval, gnorm))
        if gnorm < SCORE_TOL * max(1.0, abs(lval)) and last_step < STEP_TOL:
            return theta, lval, gnorm, it
        h_z = _z_hessian(h_theta, g_theta, theta, transforms)[np.ix_(active, active)]
        step = _ascent_direction(-h_z, g_z)
        if step is None:
            step = g_z.copy()
        cap = float(np.max(np.abs(step)))
        if cap > STEP_CAP:
            step *= STEP_CAP / cap
        moved = False
        for half in range(60):
            alpha = 0.5 ** half
            z_try = z.copy()
            z_try[active] = z[active] + alpha * step
            z_try = _clip_z(z_try, transforms)
            d_eff = z_try[active] - z[active]
            if not np.any(d_eff):
                break
            theta_try = _to_theta(z_try, transforms)
            l_try = float(np.sum(model.loglik_obs(theta_try, y)))
            slope = float(g_z @ d_eff)
            if np.isfinite(l_try) and l_try >= lval + ARMIJO * max(slope, 0.0) - 1e-13 * max(1.0, abs(lval)):
                last_step = float(np.max(np.abs(d_eff)))
                z, theta, lval = z_try, theta_try, l_try
                moved = True
                break
        if not moved:
            # clipped or curvature-stalled; accept if the gradient test passes
            if gnorm < SCORE_TOL * max(1.0, abs(lval)):
                return theta, lval, gnorm, it
            raise FitError(
                f"line search stalled at iteration {it}, gradient norm {gnorm:.3e}",
                trace=trace[-5:],
            )
    raise FitError(
        f"no convergence in {max_iter} iterations, last gradient norm {trace[-1][2]:.3e}",
        trace=trace[-5:],
    )


def _check_spd(mat, what):
    try:
        np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        raise FitError(f"{what} is not positive definite") from None


def fit_full(model: ParametricModel, data: Dataset, init=None) -> FitResult:
    """Unconstrained MLE by safeguarded Newton ascent.

    init defaults to the model's moment-matched start and must lie in the
    domain when given. Requires n >= k+1 observations.
    """
    y = model.require_support(data)
    if data.n < model.k + 1:
        raise DataError(
            f"need at least {model.k + 1} observations to fit {model.k} parameters"
        )
    theta0 = model.init_theta(data) if init is None else model.require_domain(init)
    active = list(range(model.k))
    theta, lval, gnorm, its = _newton(model, y, theta0, active)
    h = np.sum(model.hessian_obs(theta, y), axis=0)
    j_hat = -0.5 * (h + h.T)
    _check_spd(j_hat, "observed information at the full fit")
    return FitResult(
        theta_hat=ParameterPoint(tuple(theta)),
        loglik=lval,
        observed_info=j_hat,
        gradient_norm=gnorm,
        iterations=its,
        converged=True,
    )


def fit_constrained(model: ParametricModel, data: Dataset, psi: float,
                    init=None) -> ConstrainedFit:
    """MLE over the nuisance block with coordinate 1 fixed at psi.

    init may be a full parameter point or just the nuisance block; pass the
    neighboring solution to warm-start a scan over psi.
    """
    y = model.require_support(data)
    psi = float(psi)
    if not np.isfinite(psi):
        raise InvalidInputError("psi must be finite")
    if init is None:
        lam0 = model.init_theta(data)[1:]
    else:
        arr = init.as_array() if isinstance(init, ParameterPoint) else np.asarray(init, dtype=float).reshape(-1)
        if arr.size == model.k:
            lam0 = arr[1:].copy()
        elif arr.size == model.k - 1:
            lam0 = arr.copy()
        else:
            raise InvalidInputError(
                f"init must have {model.k} or {model.k - 1} coordinates, got {arr.size}"
            )
    theta0 = np.concatenate([[psi], lam0])
    model.require_domain(theta0)
    active = list(range(1, model.k))
    theta, lval, gnorm, its = _newton(model, y, theta0, active)
    h = np.sum(model.hessian_obs(theta, y), axis=0)
    j_lam = -0.5 * (h[1:, 1:] + h[1:, 1:].T)
    _check_spd(j_lam, "nuisance information at the constrained fit")
    return ConstrainedFit(
        psi=psi,
        theta=ParameterPoint(tuple(theta)),
        loglik=lval,
        j_lam=j_lam,
        gradient_norm=gnorm,
        iterations=its,
        converged=True,
    )


def profile_loglik(model: ParametricModel, data: Dataset, psi: float,
                   init=None) -> float:
    """Profile log-likelihood, the constrained maximum at the given psi."""
    return fit_constrained(model, data, psi, init=init).loglik
