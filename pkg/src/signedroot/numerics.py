"""Numerical kernel: small linear algebra, half-line quadrature, root finding,
normal distribution helpers, finite differences, and a counter-based RNG.

Everything here is pure given its inputs. Matrices are small (k <= 8), so
LAPACK's pivoted LU via numpy is used for determinants and solves; the value
added by this module is the error taxonomy and the contracts, not the inner
loops.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
from scipy import linalg as _slinalg
from scipy import optimize as _sopt
from scipy import special as _sspecial

from .exceptions import (
    BracketError,
    DomainError,
    InvalidInputError,
    QuadratureError,
    SingularMatrixError,
)

__all__ = [
    "QuadratureSpec",
    "RngStream",
    "determinant",
    "solve",
    "integrate_halfline",
    "brent_root",
    "normal_cdf",
    "normal_quantile",
    "fd_gradient",
    "fd_hessian",
]

# condition number beyond which solve() refuses to answer
_COND_LIMIT = 1e12

_U64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for adaptive half-line quadrature."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise InvalidInputError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise InvalidInputError("max_subdivisions must be >= 1")


DEFAULT_QUADRATURE = QuadratureSpec()


def _as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    return a


def determinant(m) -> float:
    """Determinant via pivoted LU, preserving the exact sign.

    Parameters
    ----------
    m : array_like
        Square matrix with finite entries.

    Returns
    -------
    float
        det(m). Singular matrices yield 0.0 up to rounding.
    """
    a = _as_square(m)
    sign, logabs = np.linalg.slogdet(a)
    if sign == 0:
        return 0.0
    return float(sign * np.exp(logabs))


def solve(m, rhs) -> np.ndarray:
    """Solve m x = rhs for small dense m, guarding against ill-conditioning.

    Raises
    ------
    SingularMatrixError
        If m is singular or its estimated condition number exceeds 1e12.
        The estimate is attached to the exception.
    """
    a = _as_square(m)
    b = np.asarray(rhs, dtype=float)
    if not np.all(np.isfinite(b)):
        raise InvalidInputError("right-hand side has non-finite entries")
    try:
        lu, piv = _slinalg.lu_factor(a)
    except _slinalg.LinAlgError as exc:  # pragma: no cover - lu_factor rarely throws
        raise SingularMatrixError(f"LU factorization failed: {exc}") from exc
    diag = np.abs(np.diag(lu))
    if np.any(diag == 0.0):
        raise SingularMatrixError("matrix is singular", condition=float("inf"))
    cond = float(np.linalg.cond(a, 1))
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularMatrixError(
            f"matrix condition estimate {cond:.3e} exceeds {_COND_LIMIT:.0e}",
            condition=cond,
        )
    return _slinalg.lu_solve((lu, piv), b)


# Gauss-Kronrod 15 point rule on [-1, 1]; the embedded 7 point Gauss rule
# provides the error estimate. Standard published abscissae and weights.
_GK_X = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_GK_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
# Gauss-7 weights sit at the odd Kronrod positions; zeros elsewhere.
_GK_WG = np.zeros(15)
_GK_WG[1::2] = [0.129484966168870, 0.279705391489277, 0.381830050505119,
                0.417959183673469, 0.381830050505119, 0.279705391489277,
                0.129484966168870]


def _panel(g, a: float, b: float) -> tuple[float, float]:
    """One Gauss-Kronrod 15 evaluation of g on [a, b] with error estimate."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    t = mid + half * _GK_X
    vals = g(t)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError(
            "integrand returned a non-finite value inside (0, 1) map",
        )
    vk = half * float(np.dot(_GK_WK, vals))
    vg = half * float(np.dot(_GK_WG, vals))
    return vk, abs(vk - vg)


def integrate_halfline(f, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Integrate f over (0, inf) adaptively.

    The half line is mapped to (0, 1) by y = t/(1-t); panels are then refined
    by splitting the largest-error panel until the summed error estimate is
    below max(abs_tol, rel_tol * |integral|).

    Parameters
    ----------
    f : callable
        Accepts a numpy array of points y > 0 and returns the integrand
        values elementwise. Scalar-only callables are adapted automatically.
    spec : QuadratureSpec
        Tolerances and subdivision budget.

    Raises
    ------
    QuadratureError
        If the budget is exhausted before reaching tolerance, or the
        integrand produces non-finite values. The best estimate and its
        error bound ride along on the exception.
    """
    try:
        probe = f(np.array([1.0, 2.0]))
        vectorized = np.shape(probe) == (2,)
    except Exception:
        vectorized = False
    if vectorized:
        fv = f
    else:
        fv = lambda ys: np.array([f(y) for y in ys], dtype=float)

    def g(t):
        one_minus = 1.0 - t
        y = t / one_minus
        return np.asarray(fv(y), dtype=float) / one_minus**2

    val, err = _panel(g, 0.0, 1.0)
    heap = [(-err, 0.0, 1.0, val, err)]
    total_val, total_err = val, err
    splits = 0
    while total_err > max(spec.abs_tol, spec.rel_tol * abs(total_val)):
        if splits >= spec.max_subdivisions:
            raise QuadratureError(
                f"half-line quadrature did not converge after "
                f"{spec.max_subdivisions} subdivisions "
                f"(error estimate {total_err:.2e})",
                estimate=total_val,
                error_estimate=total_err,
            )
        _, a, b, v_old, e_old = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        v1, e1 = _panel(g, a, mid)
        v2, e2 = _panel(g, mid, b)
        total_val += v1 + v2 - v_old
        total_err += e1 + e2 - e_old
        heapq.heappush(heap, (-e1, a, mid, v1, e1))
        heapq.heappush(heap, (-e2, mid, b, v2, e2))
        splits += 1
    return total_val


def brent_root(f, lo: float, hi: float, tol: float = 1e-9) -> float:
    """Find a root of f on [lo, hi] by Brent's method.

    Requires a sign change: f(lo) * f(hi) <= 0.

    Raises
    ------
    BracketError
        If the endpoints do not bracket a root.
    """
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise InvalidInputError(f"invalid bracket [{lo}, {hi}]")
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if flo * fhi > 0:
        raise BracketError(
            f"no sign change on [{lo:.6g}, {hi:.6g}]: f(lo)={flo:.6g}, f(hi)={fhi:.6g}"
        )
    rtol = max(4 * np.finfo(float).eps, min(tol, 1e-4))
    return float(_sopt.brentq(f, lo, hi, xtol=tol, rtol=rtol))


def normal_cdf(x: float):
    """Standard normal CDF via the complementary error function."""
    return _sspecial.ndtr(x)


def normal_quantile(p: float):
    """Inverse standard normal CDF. Requires 0 < p < 1."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError(f"normal_quantile requires 0 < p < 1, got {p}")
    return _sspecial.ndtri(p)


_H_GRAD = float(np.finfo(float).eps ** (1.0 / 3.0))
_H_HESS = float(np.finfo(float).eps ** 0.25)


def fd_gradient(f, x, h: float = _H_GRAD) -> np.ndarray:
    """Central-difference gradient with per-coordinate step h*max(1, |x_i|)."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        step = h * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2.0 * step)
    return g


def fd_hessian(f, x, h: float = _H_HESS) -> np.ndarray:
    """Central-difference Hessian, symmetrized as (H + H^T)/2.

    Uses a larger default step than fd_gradient because second differences
    amplify rounding error.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    steps = np.array([h * max(1.0, abs(x[i])) for i in range(n)])
    hess = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = steps[i]
        hess[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / steps[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = steps[j]
            hess[i, j] = hess[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * steps[i] * steps[j])
    return 0.5 * (hess + hess.T)


@dataclass
class RngStream:
    """Counter-based uniform generator (Philox 4x64).

    A draw is a pure function of (seed, stream, counter), so replicate
    streams can be created anywhere, in any order, on any worker, and still
    produce identical values. Advancing the counter mutates only this small
    record; copy() before sharing if independent cursors are needed.
    """

    seed: int
    stream: int = 0
    counter: int = 0

    def __post_init__(self):
        if self.counter < 0:
            raise InvalidInputError("counter must be nonnegative")

    def copy(self) -> "RngStream":
        return RngStream(self.seed, self.stream, self.counter)

    def uniform_block(self, m: int) -> np.ndarray:
        """Return the next m uniforms in the strict open interval (0, 1)."""
        if m < 0:
            raise InvalidInputError("block size must be nonnegative")
        if m == 0:
            return np.empty(0)
        block0, offset = divmod(self.counter, 4)
        nwords = ((offset + m + 3) // 4) * 4
        bitgen = np.random.Philox(
            counter=np.array([block0, 0, 0, 0], dtype=np.uint64),
            key=np.array([self.seed & _U64, self.stream & _U64], dtype=np.uint64),
        )
        raw = bitgen.random_raw(nwords)[offset:offset + m]
        self.counter += m
        # top 53 bits, centered on the bin midpoint: never exactly 0 or 1
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def rng_uniform(stream: RngStream) -> float:
    """Draw one uniform from the stream, advancing its counter by one."""
    return float(stream.uniform_block(1)[0])
