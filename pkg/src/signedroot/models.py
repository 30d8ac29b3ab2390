"""Parametric models and the likelihood covariance functions.

A model supplies the per-observation log-density, its first two derivatives,
a sampler, and domain/support predicates. On top of that this module builds
the likelihood covariance quantities used by the modified signed root:

- expected cross-covariances I(theta, theta0) and Q(theta, theta0), taken
  under the model at theta0 and scaled to the full sample, and
- their empirical counterparts, plain sums of per-observation products.

Two models ship with the package: a linear-hazard exponential-family-adjacent
survival model on (0, inf) (hazard psi + lam*y, not an exponential family),
and a normal location-scale model used as a closed-form cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError, DomainError, InvalidInputError
from .numerics import DEFAULT_QUADRATURE, QuadratureSpec, RngStream, integrate_halfline

__all__ = [
    "ParameterPoint",
    "Dataset",
    "ParametricModel",
    "LinearExponentialModel",
    "NormalModel",
    "CovarianceBundle",
    "loglik",
    "score",
    "hessian",
    "expected_I",
    "expected_Q",
    "empirical_I",
    "empirical_Q",
    "linexp_density",
    "linexp_sample",
    "get_model",
    "MODEL_IDS",
]


@dataclass(frozen=True)
class ParameterPoint:
    """Parameter vector theta; coordinate 1 is the interest parameter psi.

    The remaining coordinates are the nuisance block lam. Instances are
    plain value objects; domain membership is the model's business.
    """

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 1:
            raise InvalidInputError("parameter point needs at least one coordinate")
        if not all(np.isfinite(v) for v in vals):
            raise InvalidInputError(f"non-finite parameter coordinates: {vals}")
        object.__setattr__(self, "values", vals)

    @property
    def k(self) -> int:
        return len(self.values)

    @property
    def psi(self) -> float:
        return self.values[0]

    @property
    def lam(self) -> tuple:
        return self.values[1:]

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    @staticmethod
    def of(*values) -> "ParameterPoint":
        return ParameterPoint(tuple(values))


@dataclass(frozen=True)
class Dataset:
    """Ordered i.i.d. scalar observations."""

    observations: tuple

    def __post_init__(self):
        try:
            obs = tuple(float(v) for v in self.observations)
        except (TypeError, ValueError) as exc:
            raise DataError(f"observations must be numeric: {exc}") from exc
        if len(obs) == 0:
            raise DataError("dataset is empty")
        if not all(np.isfinite(v) for v in obs):
            raise DataError("dataset contains non-finite observations")
        object.__setattr__(self, "observations", obs)

    @property
    def n(self) -> int:
        return len(self.observations)

    def as_array(self) -> np.ndarray:
        return np.array(self.observations, dtype=float)

    @staticmethod
    def of(values) -> "Dataset":
        return Dataset(tuple(values))


class ParametricModel:
    """Contract for a regular parametric model with scalar observations.

    Subclasses must define: model_id, k, support ("halfline" or "realline"),
    transforms (per-coordinate "log" or "identity", consumed by the fitter),
    loglik_obs, score_obs, hessian_obs, density_obs, in_domain, in_support,
    init_theta and sample. All per-observation functions are array-native in
    y (leading axis is the observation axis).

    Models with closed-form expectations may override expected_I_obs and
    expected_Q_obs; otherwise expectations fall back to half-line quadrature,
    which requires support == "halfline".
    """

    model_id: str = ""
    k: int = 0
    support: str = "halfline"
    transforms: tuple = ()

    # -- mandatory per-observation pieces -----------------------------------
    def loglik_obs(self, theta: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def score_obs(self, theta: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian_obs(self, theta: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def density_obs(self, theta: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def in_domain(self, theta: np.ndarray) -> bool:
        raise NotImplementedError

    def in_support(self, y: np.ndarray) -> bool:
        raise NotImplementedError

    def init_theta(self, data: Dataset) -> np.ndarray:
        raise NotImplementedError

    def sample(self, theta, n: int, stream: RngStream) -> Dataset:
        raise NotImplementedError

    # -- optional closed-form expectations -----------------------------------
    expected_I_obs = None
    expected_Q_obs = None

    # -- shared validation helpers -------------------------------------------
    def require_domain(self, theta) -> np.ndarray:
        th = _theta_array(theta, self.k)
        if not self.in_domain(th):
            raise DomainError(
                f"theta {tuple(th)} outside the {self.model_id} parameter domain"
            )
        return th

    def require_support(self, data: Dataset) -> np.ndarray:
        y = data.as_array()
        if not self.in_support(y):
            raise DataError(
                f"dataset contains observations outside the {self.model_id} support"
            )
        return y


def _theta_array(theta, k: int) -> np.ndarray:
    if isinstance(theta, ParameterPoint):
        th = theta.as_array()
    else:
        th = np.asarray(theta, dtype=float).reshape(-1)
    if th.size != k:
        raise InvalidInputError(f"expected {k} parameter coordinates, got {th.size}")
    if not np.all(np.isfinite(th)):
        raise InvalidInputError("non-finite parameter coordinates")
    return th


# ---------------------------------------------------------------------------
# built-in model: linear hazard on the half line
# ---------------------------------------------------------------------------

class LinearExponentialModel(ParametricModel):
    """Density (psi + lam*y) * exp(-(psi*y + lam*y^2/2)) on y > 0.

    The hazard is linear in y; psi > 0 and lam > 0 keep it positive on the
    whole support. This is not an exponential family, which is what makes it
    a good stress test for the covariance-based statistics.
    """

    model_id = "linexp"
    k = 2
    support = "halfline"
    transforms = ("log", "log")

    def loglik_obs(self, theta, y):
        psi, lam = theta[..., 0], theta[..., 1]
        y = np.asarray(y, dtype=float)
        a = psi + lam * y
        return np.log(a) - psi * y - 0.5 * lam * y * y

    def score_obs(self, theta, y):
        psi, lam = theta[..., 0], theta[..., 1]
        y = np.asarray(y, dtype=float)
        a = psi + lam * y
        return np.stack([1.0 / a - y, y / a - 0.5 * y * y], axis=-1)

    def hessian_obs(self, theta, y):
        psi, lam = theta[..., 0], theta[..., 1]
        y = np.asarray(y, dtype=float)
        inv_a2 = 1.0 / (psi + lam * y) ** 2
        h = np.empty(np.shape(y) + (2, 2))
        h[..., 0, 0] = -inv_a2
        h[..., 0, 1] = h[..., 1, 0] = -y * inv_a2
        h[..., 1, 1] = -y * y * inv_a2
        return h

    def density_obs(self, theta, y):
        psi, lam = theta[..., 0], theta[..., 1]
        y = np.asarray(y, dtype=float)
        return (psi + lam * y) * np.exp(-(psi * y + 0.5 * lam * y * y))

    def in_domain(self, theta):
        return bool(theta[0] > 0.0 and theta[1] > 0.0)

    def in_support(self, y):
        return bool(np.all(y > 0.0))

    def init_theta(self, data):
        # moment-matched exponential start, always admissible
        ybar = float(np.mean(data.as_array()))
        psi0 = 1.0 / ybar
        return np.array([psi0, 0.1 * psi0 / ybar])

    def sample(self, theta, n, stream):
        th = self.require_domain(theta)
        return Dataset.of(linexp_sample(th[0], th[1], n, stream).tolist())


def linexp_density(y, psi: float, lam: float):
    """Density of the linear-hazard model; psi, lam, y all positive."""
    if psi <= 0 or lam <= 0:
        raise DomainError(f"parameters must be positive, got psi={psi}, lam={lam}")
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DataError("density is defined for y > 0 only")
    return (psi + lam * y) * np.exp(-(psi * y + 0.5 * lam * y * y))


def _linexp_transform(t, psi: float, lam: float):
    # inverse CDF of the linear-hazard model applied to t = -log(1-u);
    # written to avoid cancellation when lam*t << psi^2
    return 2.0 * t / (psi + np.sqrt(psi * psi + 2.0 * lam * t))


def linexp_sample(psi: float, lam: float, n: int, stream: RngStream) -> np.ndarray:
    """Draw n observations by closed-form CDF inversion.

    With U uniform and t = -log(1-U), the draw solves
    psi*y + lam*y^2/2 = t for the positive root.
    """
    if psi <= 0 or lam <= 0:
        raise DomainError(f"parameters must be positive, got psi={psi}, lam={lam}")
    if n < 1:
        raise InvalidInputError("sample size must be >= 1")
    u = stream.uniform_block(n)
    t = -np.log1p(-u)
    return _linexp_transform(t, psi, lam)


# ---------------------------------------------------------------------------
# built-in model: normal location-scale (interest = mean)
# ---------------------------------------------------------------------------

_LOG_2PI = float(np.log(2.0 * np.pi))


class NormalModel(ParametricModel):
    """Normal model with theta = (mu, sigma); the mean is the interest.

    All expectations have closed forms, so this model doubles as an exact
    oracle for the quadrature-based machinery.
    """

    model_id = "normal"
    k = 2
    support = "realline"
    transforms = ("identity", "log")

    def loglik_obs(self, theta, y):
        mu, sigma = theta[..., 0], theta[..., 1]
        y = np.asarray(y, dtype=float)
        z = (y - mu) / sigma
        return -0.5 * _LOG_2PI - np.log(sigma) - 0.5 * z * z

    def score_obs(self, theta, y):
        mu, sigma = theta[..., 0], theta[..., 1]
        y = np.asarray(y, dtype=float)
        d = y - mu
        return np.stack(
            [d / sigma**2, -1.0 / sigma + d * d / sigma**3], axis=-1
        )

    def hessian_obs(self, theta, y):
        mu, sigma = theta[..., 0], theta[..., 1]
        y = np.asarray(y, dtype=float)
        d = y - mu
        h = np.empty(np.shape(y) + (2, 2))
        h[..., 0, 0] = np.broadcast_to(-1.0 / sigma**2, np.shape(y))
        h[..., 0, 1] = h[..., 1, 0] = -2.0 * d / sigma**3
        h[..., 1, 1] = 1.0 / sigma**2 - 3.0 * d * d / sigma**4
        return h

    def density_obs(self, theta, y):
        return np.exp(self.loglik_obs(theta, y))

    def in_domain(self, theta):
        return bool(theta[1] > 0.0)

    def in_support(self, y):
        return True

    def init_theta(self, data):
        y = data.as_array()
        sd = float(np.std(y))
        return np.array([float(np.mean(y)), sd if sd > 0 else 1.0])

    def sample(self, theta, n, stream):
        th = self.require_domain(theta)
        from .numerics import normal_quantile

        u = stream.uniform_block(n)
        return Dataset.of((th[0] + th[1] * normal_quantile(u)).tolist())

    # closed-form expectations via the polynomial representation below
    def expected_I_obs(self, theta, theta0):
        s_t = _normal_score_polys(theta, theta0)
        s_0 = _normal_score_polys(theta0, theta0)
        return _poly_cross(s_t, s_0, theta0[..., 1])

    def expected_Q_obs(self, theta, theta0):
        l_t = _normal_loglik_poly(theta, theta0)
        s_0 = _normal_score_polys(theta0, theta0)
        return _poly_cross(l_t[..., None, :], s_0, theta0[..., 1])[..., 0, :]


def _normal_loglik_poly(theta, theta0):
    # per-observation log-density as a quadratic in x = y - mu0
    mu, sigma = theta[..., 0], theta[..., 1]
    d = theta0[..., 0] - mu
    c0 = -0.5 * _LOG_2PI - np.log(sigma) - 0.5 * d * d / sigma**2
    c1 = -d / sigma**2
    c2 = np.broadcast_to(-0.5 / sigma**2, np.shape(c0))
    return np.stack([c0, c1, c2], axis=-1)


def _normal_score_polys(theta, theta0):
    # score components as quadratics in x = y - mu0; axis -2 is the component
    mu, sigma = theta[..., 0], theta[..., 1]
    d = theta0[..., 0] - mu
    zero = np.zeros(np.shape(d))
    s_mu = np.stack([d / sigma**2, np.broadcast_to(1.0 / sigma**2, np.shape(d)), zero], axis=-1)
    s_sg = np.stack(
        [-1.0 / sigma + d * d / sigma**3, 2.0 * d / sigma**3,
         np.broadcast_to(1.0 / sigma**3, np.shape(d))],
        axis=-1,
    )
    return np.stack([s_mu, s_sg], axis=-2)


def _poly_cross(p, q, sigma0):
    """E[p_r(x) q_s(x)] for centered normal x with scale sigma0.

    p has shape (..., r, 3), q has shape (..., s, 3); returns (..., r, s).
    Only moments up to x^4 appear: (1, 0, s^2, 0, 3 s^4).
    """
    s2 = sigma0**2
    moments = np.stack(
        [np.ones_like(s2), np.zeros_like(s2), s2, np.zeros_like(s2), 3.0 * s2 * s2],
        axis=-1,
    )
    out = np.zeros(p.shape[:-2] + (p.shape[-2], q.shape[-2]))
    for i in range(3):
        for j in range(3):
            out += (
                p[..., :, None, i] * q[..., None, :, j] * moments[..., i + j][..., None, None]
            )
    return out


# ---------------------------------------------------------------------------
# likelihood, derivatives, covariances
# ---------------------------------------------------------------------------

def loglik(model: ParametricModel, theta, data: Dataset) -> float:
    """Full-sample log-likelihood sum_j loglik_obs(theta; y_j)."""
    th = model.require_domain(theta)
    y = model.require_support(data)
    return float(np.sum(model.loglik_obs(th, y)))


def score(model: ParametricModel, theta, data: Dataset) -> np.ndarray:
    """Full-sample score vector (analytic; models ship derivatives)."""
    th = model.require_domain(theta)
    y = model.require_support(data)
    return np.sum(model.score_obs(th, y), axis=0)


def hessian(model: ParametricModel, theta, data: Dataset) -> np.ndarray:
    """Full-sample Hessian of the log-likelihood, exactly symmetric."""
    th = model.require_domain(theta)
    y = model.require_support(data)
    h = np.sum(model.hessian_obs(th, y), axis=0)
    return 0.5 * (h + h.T)


def _expected_entry(model, integrand, theta0, spec):
    weight = lambda y: model.density_obs(theta0, y)
    return integrate_halfline(lambda y: integrand(y) * weight(y), spec)


def expected_I(model: ParametricModel, theta, theta0, n: int = 1,
               spec: QuadratureSpec = DEFAULT_QUADRATURE) -> np.ndarray:
    """Full-sample E[score(theta) score(theta0)^T] under theta0.

    The i.i.d. cross terms vanish because one factor is always the score at
    the sampling point theta0, whose expectation is zero; the full-sample
    matrix is therefore n times the single-observation expectation. Pass
    n=data.n for the full-sample quantity; the default n=1 gives the
    per-observation matrix.
    """
    th = model.require_domain(theta)
    th0 = model.require_domain(theta0)
    if model.expected_I_obs is not None:
        return n * model.expected_I_obs(th, th0)
    if model.support != "halfline":
        raise InvalidInputError(
            f"model {model.model_id} has no closed-form expectations and "
            "no half-line support for quadrature"
        )
    k = model.k
    out = np.empty((k, k))
    for r in range(k):
        for s in range(k):
            out[r, s] = _expected_entry(
                model,
                lambda y, r=r, s=s: model.score_obs(th, y)[..., r]
                * model.score_obs(th0, y)[..., s],
                th0,
                spec,
            )
    return n * out


def expected_Q(model: ParametricModel, theta, theta0, n: int = 1,
               spec: QuadratureSpec = DEFAULT_QUADRATURE) -> np.ndarray:
    """Full-sample E[loglik(theta) * score(theta0)^T] under theta0, a 1 x k row.

    Same cross-term reduction as expected_I; see that docstring.
    """
    th = model.require_domain(theta)
    th0 = model.require_domain(theta0)
    if model.expected_Q_obs is not None:
        return n * model.expected_Q_obs(th, th0)
    if model.support != "halfline":
        raise InvalidInputError(
            f"model {model.model_id} has no closed-form expectations and "
            "no half-line support for quadrature"
        )
    k = model.k
    out = np.empty(k)
    for s in range(k):
        out[s] = _expected_entry(
            model,
            lambda y, s=s: model.loglik_obs(th, y) * model.score_obs(th0, y)[..., s],
            th0,
            spec,
        )
    return n * out


def empirical_I(model: ParametricModel, theta, theta0, data: Dataset) -> np.ndarray:
    """Sum over observations of score_j(theta) score_j(theta0)^T."""
    th = model.require_domain(theta)
    th0 = model.require_domain(theta0)
    y = model.require_support(data)
    s_t = model.score_obs(th, y)
    s_0 = model.score_obs(th0, y)
    return np.einsum("jr,js->rs", s_t, s_0)


def empirical_Q(model: ParametricModel, theta, theta0, data: Dataset) -> np.ndarray:
    """Sum over observations of loglik_j(theta) * score_j(theta0)^T."""
    th = model.require_domain(theta)
    th0 = model.require_domain(theta0)
    y = model.require_support(data)
    l_t = model.loglik_obs(th, y)
    s_0 = model.score_obs(th0, y)
    return np.einsum("j,js->s", l_t, s_0)


@dataclass
class CovarianceBundle:
    """Covariance accessor bound to one model, dataset and evaluation point.

    variant "expected" uses model expectations scaled to the full sample;
    variant "empirical" uses plain per-observation sums. The matrix i is the
    diagonal case I(theta_hat, theta_hat), cached because the statistics
    reuse it at every psi.
    """

    variant: str
    model: ParametricModel
    data: Dataset
    theta_hat: np.ndarray
    quadrature: QuadratureSpec = DEFAULT_QUADRATURE
    _i_cache: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.variant not in ("expected", "empirical"):
            raise InvalidInputError(f"unknown covariance variant {self.variant!r}")
        self.theta_hat = _theta_array(self.theta_hat, self.model.k)

    def Q_at(self, theta, theta0) -> np.ndarray:
        if self.variant == "expected":
            return expected_Q(self.model, theta, theta0, n=self.data.n,
                              spec=self.quadrature)
        return empirical_Q(self.model, theta, theta0, self.data)

    def I_at(self, theta, theta0) -> np.ndarray:
        if self.variant == "expected":
            return expected_I(self.model, theta, theta0, n=self.data.n,
                              spec=self.quadrature)
        return empirical_I(self.model, theta, theta0, self.data)

    @property
    def i(self) -> np.ndarray:
        if self._i_cache is None:
            self._i_cache = self.I_at(self.theta_hat, self.theta_hat)
        return self._i_cache


_MODELS = {
    "linexp": LinearExponentialModel,
    "normal": NormalModel,
}

MODEL_IDS = tuple(sorted(_MODELS))


def get_model(model_id: str) -> ParametricModel:
    """Look up a built-in model by id ("linexp" or "normal")."""
    try:
        return _MODELS[model_id]()
    except KeyError:
        raise InvalidInputError(
            f"unknown model {model_id!r}; available: {', '.join(MODEL_IDS)}"
        ) from None
