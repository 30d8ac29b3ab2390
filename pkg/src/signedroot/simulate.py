"""Monte Carlo coverage studies and distributional diagnostics.

Replicates are tied to counter-based RNG streams keyed by replicate index,
so results are a pure function of the study specification: independent of
worker count, chunking, and of how many further replicates follow. Work is
done in fixed-size chunks by vectorized per-model engines (a generic
per-replicate fallback covers models without one); per-replicate values are
chunk-independent because every array row evolves on its own state.

Coverage at probability p counts statistic(psi_true) >= normal_quantile(1-p),
which by monotonicity of each statistic in psi is the same event as
"psi_true <= upper limit at p" without any root finding.

Replicates whose fits fail, or whose statistics are non-finite or sit on the
removable singularity (|R| below a small guard), are excluded from all kinds
at once and counted; a report with more than 0.1% exclusions is flagged
invalid rather than repaired.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as _sspecial

from .exceptions import InvalidInputError, SignedRootError
from .fitting import LOG_CEIL, LOG_FLOOR, fit_constrained, fit_full
from .models import (
    ParametricModel,
    _normal_loglik_poly,
    _normal_score_polys,
    _poly_cross,
    get_model,
)
from .numerics import RngStream, normal_cdf, normal_quantile
from .statistics import KINDS, signed_lrt, u_bar, u_hat

__all__ = ["CoverageSpec", "CoverageReport", "NormalityDiagnostic", "RateProbe",
           "coverage_study", "normality_diagnostic", "rate_probe", "derive_seed"]

CHUNK = 4096
RSTAR_GUARD = 1e-4     # replicates with |R| below this are excluded
FAILURE_CEILING = 1e-3
LAGUERRE_NODES = 256   # scipy's rule stays finite here; numpy's overflows near 200


@lru_cache(maxsize=4)
def _laguerre(nodes: int):
    return _sspecial.roots_laguerre(nodes)


def derive_seed(model_id: str, theta, n: int, master_seed: int) -> int:
    """Stable 64-bit stream seed from the quantities that shape a replicate.

    Only the sampling design enters (model, true parameter, per-replicate n,
    master seed): probability levels, statistic kinds, worker hints and the
    replicate count do not, so extending a run keeps its prefix and
    re-slicing levels cannot move any draw.
    """
    key = "|".join([
        str(model_id),
        ",".join(repr(float(v)) for v in theta),
        str(int(n)),
        str(int(master_seed)),
    ])
    return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(),
                          "little")


# ---------------------------------------------------------------------------
# chunk engines: each returns (r, rbar, rhat, ok) arrays of length count
# ---------------------------------------------------------------------------

def _rstar_direct(r, u):
    """Vectorized r + log(u/r)/r with the exclusion guard applied."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = u / r
        val = r + np.log(ratio) / r
    good = (np.abs(r) > RSTAR_GUARD) & (ratio > 0.0) & np.isfinite(val)
    return np.where(good, val, np.nan), good


def _u_rows(i00, i01, i11, j00, j01, j11, dq0, dq1, big10, big11, jlam, detj,
            sign_r):
    """Shared 2x2 determinant assembly of U from covariance sums.

    Row 1 is (Q at the full fit minus Q at the constrained fit) times
    i^{-1} J; row 2 is the nuisance row of I(theta_psi, theta_hat) i^{-1} J.
    """
    deti = i00 * i11 - i01 * i01
    with np.errstate(divide="ignore", invalid="ignore"):
        b00 = (i11 * j00 - i01 * j01) / deti
        b01 = (i11 * j01 - i01 * j11) / deti
        b10 = (i00 * j01 - i01 * j00) / deti
        b11 = (i00 * j11 - i01 * j01) / deti
        r10 = dq0 * b00 + dq1 * b10
        r11 = dq0 * b01 + dq1 * b11
        r20 = big10 * b00 + big11 * b10
        r21 = big10 * b01 + big11 * b11
        u = (r10 * r21 - r11 * r20) / np.sqrt(jlam * detj)
    u = np.where(sign_r != 0.0, np.abs(u) * sign_r, u)
    ok = (deti > 0.0) & np.isfinite(u)
    return u, ok


def _draw_uniform(seed, start, count, n):
    out = np.empty((count, n))
    for i in range(count):
        out[i] = RngStream(seed, start + i).uniform_block(n)
    return out


# -- linear-hazard engine ----------------------------------------------------

def _linexp_loglik_rows(z, y, sy, sy2):
    th = np.exp(z)
    a = th[:, 0:1] + th[:, 1:2] * y
    return np.log(a).sum(axis=1) - th[:, 0] * sy - 0.5 * th[:, 1] * sy2


def _newton_rows(z0, loglik_fn, grad_curv_fn, max_iter=100):
    """Row-wise safeguarded Newton ascent in clipped log coordinates.

    Every row evolves only on its own state (frozen rows stop moving), so a
    row's result does not depend on which chunk it shares with. The
    convergence test matches the scalar fitter: transformed gradient below
    1e-8 * max(1, |loglik|) and last accepted step below 1e-10.
    """
    z = z0.copy()
    m = z.shape[0]
    lval = loglik_fn(z)
    frozen = np.zeros(m, dtype=bool)
    last_step = np.full(m, np.inf)
    for _ in range(max_iter):
        g, neg_h = grad_curv_fn(z)                      # (m, d), (m, d, d) or (m,) pair
        gn = np.max(np.abs(g), axis=1)
        conv = (gn < 1e-8 * np.maximum(1.0, np.abs(lval))) & (last_step < 1e-10)
        frozen |= conv
        if frozen.all():
            break
        # ridge for rows with non-PD curvature (the transformed likelihood is
        # convex far below a positivity optimum): shift by the most negative
        # eigenvalue so the step keeps Newton-like size instead of creeping
        d = g.shape[1]
        if d == 1:
            curv = neg_h[:, 0, 0]
            curv_s = np.where(curv > 0.0, curv,
                              np.abs(curv) + 1e-8 * np.maximum(1.0, np.abs(curv)))
            step = (g[:, 0] / curv_s)[:, None]
        else:
            a00, a01, a11 = neg_h[:, 0, 0], neg_h[:, 0, 1], neg_h[:, 1, 1]
            det = a00 * a11 - a01 * a01
            pd = (a00 > 0.0) & (det > 0.0)
            tr = a00 + a11
            disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
            eig_min = 0.5 * (tr - disc)
            shift = np.where(pd, 0.0,
                             np.abs(eig_min) + 1e-8 * np.maximum(1.0, np.abs(tr)))
            b00 = a00 + shift
            b11 = a11 + shift
            det_s = b00 * b11 - a01 * a01
            solvable = det_s > 0.0
            det_s = np.where(solvable, det_s, 1.0)
            s0 = np.where(solvable, (b11 * g[:, 0] - a01 * g[:, 1]) / det_s, g[:, 0])
            s1 = np.where(solvable, (b00 * g[:, 1] - a01 * g[:, 0]) / det_s, g[:, 1])
            asc = s0 * g[:, 0] + s1 * g[:, 1] > 0.0
            s0 = np.where(asc, s0, g[:, 0])
            s1 = np.where(asc, s1, g[:, 1])
            step = np.stack([s0, s1], axis=1)
        cap = np.max(np.abs(step), axis=1, keepdims=True)
        step = np.where(cap > 2.0, step * (2.0 / np.where(cap > 0, cap, 1.0)), step)
        step[frozen] = 0.0
        alpha = np.ones(m)
        accepted = frozen.copy()
        z_next, l_next = z, lval
        for _bt in range(30):
            trial = np.clip(z + alpha[:, None] * step, LOG_FLOOR, LOG_CEIL)
            lt = loglik_fn(trial)
            ok_rows = (~accepted & np.isfinite(lt)
                       & (lt >= lval - 1e-11 * np.maximum(1.0, np.abs(lval))))
            if ok_rows.any():
                z_next = np.where(ok_rows[:, None], trial, z_next)
                l_next = np.where(ok_rows, lt, l_next)
                accepted |= ok_rows
            if accepted.all():
                break
            alpha = np.where(accepted, alpha, alpha * 0.5)
        moved = accepted & ~frozen
        last_step = np.where(moved, np.max(np.abs(z_next - z), axis=1), last_step)
        z, lval = z_next, l_next
    g, _ = grad_curv_fn(z)
    gn = np.max(np.abs(g), axis=1)
    frozen |= (gn < 1e-8 * np.maximum(1.0, np.abs(lval))) & (last_step < 1e-10)
    return z, lval, frozen


def _linexp_full_fit(y, sy, sy2):
    n = y.shape[1]
    ybar = sy / n
    psi0 = 1.0 / ybar
    z0 = np.stack([np.log(psi0), np.log(0.1 * psi0 / ybar)], axis=1)

    def grad_curv(z):
        th = np.exp(z)
        p, l_ = th[:, 0:1], th[:, 1:2]
        a = p + l_ * y
        inv = 1.0 / a
        inv2 = inv * inv
        g0 = inv.sum(1) - sy
        g1 = (y * inv).sum(1) - 0.5 * sy2
        h00 = -inv2.sum(1)
        h01 = -(y * inv2).sum(1)
        h11 = -(y * y * inv2).sum(1)
        ps, ls = th[:, 0], th[:, 1]
        g = np.stack([ps * g0, ls * g1], axis=1)
        neg_h = np.empty((z.shape[0], 2, 2))
        neg_h[:, 0, 0] = -(ps * ps * h00 + ps * g0)
        neg_h[:, 0, 1] = neg_h[:, 1, 0] = -(ps * ls * h01)
        neg_h[:, 1, 1] = -(ls * ls * h11 + ls * g1)
        return g, neg_h

    z, lval, conv = _newton_rows(z0, lambda z: _linexp_loglik_rows(z, y, sy, sy2),
                                 grad_curv)
    return np.exp(z), lval, conv


def _linexp_constrained_fit(y, sy, sy2, psi0, lam_start):
    def loglik_fn(zl):
        lam = np.exp(zl[:, 0])
        a = psi0 + lam[:, None] * y
        return np.log(a).sum(axis=1) - psi0 * sy - 0.5 * lam * sy2

    def grad_curv(zl):
        lam = np.exp(zl[:, 0])
        a = psi0 + lam[:, None] * y
        g1 = (y / a).sum(1) - 0.5 * sy2
        h11 = -((y * y) / (a * a)).sum(1)
        g = (lam * g1)[:, None]
        neg_h = (-(lam * lam * h11 + lam * g1))[:, None, None]
        return g, neg_h

    z, lval, conv = _newton_rows(np.log(lam_start)[:, None], loglik_fn, grad_curv)
    return np.exp(z[:, 0]), lval, conv


def _linexp_chunk(theta, n, seed, start, count):
    psi_t, lam_t = float(theta[0]), float(theta[1])
    u = _draw_uniform(seed, start, count, n)
    t = -np.log1p(-u)
    y = 2.0 * t / (psi_t + np.sqrt(psi_t * psi_t + 2.0 * lam_t * t))
    sy = y.sum(1)
    sy2 = (y * y).sum(1)

    th_hat, l_hat, conv_full = _linexp_full_fit(y, sy, sy2)
    ph, lh = th_hat[:, 0], th_hat[:, 1]
    ybar = sy / n
    interior = lh > 1e-15
    lam_start = np.where(interior, lh, 0.1 / (ybar * ybar))
    lam_con, l_con, conv_con = _linexp_constrained_fit(y, sy, sy2, psi_t, lam_start)

    drop = np.maximum(l_hat - l_con, 0.0)
    sign_r = np.sign(ph - psi_t)
    r = sign_r * np.sqrt(2.0 * drop)

    # observed information at the full fit, original coordinates
    a_h = ph[:, None] + lh[:, None] * y
    inv2_h = 1.0 / (a_h * a_h)
    j00 = inv2_h.sum(1)
    j01 = (y * inv2_h).sum(1)
    j11 = (y * y * inv2_h).sum(1)
    detj = j00 * j11 - j01 * j01
    a_c = psi_t + lam_con[:, None] * y
    jlam = ((y * y) / (a_c * a_c)).sum(1)

    # empirical covariance sums
    s_h0 = 1.0 / a_h - y
    s_h1 = y / a_h - 0.5 * y * y
    s_c0 = 1.0 / a_c - y
    s_c1 = y / a_c - 0.5 * y * y
    l1_h = np.log(a_h) - ph[:, None] * y - 0.5 * lh[:, None] * y * y
    l1_c = np.log(a_c) - psi_t * y - 0.5 * lam_con[:, None] * y * y
    dq0_e = ((l1_h - l1_c) * s_h0).sum(1)
    dq1_e = ((l1_h - l1_c) * s_h1).sum(1)
    u_hat_arr, ok_uh = _u_rows(
        (s_h0 * s_h0).sum(1), (s_h0 * s_h1).sum(1), (s_h1 * s_h1).sum(1),
        j00, j01, j11, dq0_e, dq1_e,
        (s_c1 * s_h0).sum(1), (s_c1 * s_h1).sum(1),
        jlam, detj, sign_r,
    )

    # expected covariances by Gauss-Laguerre under the full fit:
    # with t the cumulative hazard, y(t) inverts it and the density weight
    # becomes exactly exp(-t)
    tq, wq = _laguerre(LAGUERRE_NODES)
    root = np.sqrt(ph[:, None] ** 2 + 2.0 * lh[:, None] * tq[None, :])
    yq = 2.0 * tq[None, :] / (ph[:, None] + root)
    aq_h = root                       # equals psi_hat + lam_hat * yq
    sq_h0 = 1.0 / aq_h - yq
    sq_h1 = yq / aq_h - 0.5 * yq * yq
    l1q_h = np.log(aq_h) - tq[None, :]
    aq_c = psi_t + lam_con[:, None] * yq
    sq_c0 = 1.0 / aq_c - yq
    sq_c1 = yq / aq_c - 0.5 * yq * yq
    l1q_c = np.log(aq_c) - psi_t * yq - 0.5 * lam_con[:, None] * yq * yq

    def expect(x):
        return n * (x * wq[None, :]).sum(1)

    dq0_x = expect((l1q_h - l1q_c) * sq_h0)
    dq1_x = expect((l1q_h - l1q_c) * sq_h1)
    u_bar_arr, ok_ub = _u_rows(
        expect(sq_h0 * sq_h0), expect(sq_h0 * sq_h1), expect(sq_h1 * sq_h1),
        j00, j01, j11, dq0_x, dq1_x,
        expect(sq_c1 * sq_h0), expect(sq_c1 * sq_h1),
        jlam, detj, sign_r,
    )

    rbar, ok_b = _rstar_direct(r, u_bar_arr)
    rhat, ok_h = _rstar_direct(r, u_hat_arr)
    ok = (conv_full & conv_con & np.isfinite(r) & (detj > 0.0) & (jlam > 0.0)
          & ok_uh & ok_ub & ok_b & ok_h)
    return r, rbar, rhat, ok


# -- normal engine (closed forms throughout) ---------------------------------

def _normal_chunk(theta, n, seed, start, count):
    mu_t, sig_t = float(theta[0]), float(theta[1])
    u = _draw_uniform(seed, start, count, n)
    y = mu_t + sig_t * normal_quantile(u)
    ybar = y.mean(1)
    m2 = ((y - ybar[:, None]) ** 2).mean(1)
    sig2_c = ((y - mu_t) ** 2).mean(1)
    valid = (m2 > 0.0) & (sig2_c > 0.0)
    m2 = np.where(valid, m2, 1.0)
    sig2_c = np.where(valid, sig2_c, 1.0)
    sig_h = np.sqrt(m2)
    sig_c = np.sqrt(sig2_c)

    sign_r = np.sign(ybar - mu_t)
    r = sign_r * np.sqrt(n * np.log(sig2_c / m2))

    j00 = n / m2
    j01 = np.zeros(count)           # sum of residuals at the mean is zero
    j11 = 2.0 * n / m2
    detj = j00 * j11
    jlam = 2.0 * n / sig2_c

    th_h = np.stack([ybar, sig_h], axis=1)
    th_c = np.stack([np.full(count, mu_t), sig_c], axis=1)

    # empirical sums
    d_h = y - ybar[:, None]
    d_c = y - mu_t
    s_h0 = d_h / m2[:, None]
    s_h1 = -1.0 / sig_h[:, None] + d_h * d_h / (m2 * sig_h)[:, None]
    s_c0 = d_c / sig2_c[:, None]
    s_c1 = -1.0 / sig_c[:, None] + d_c * d_c / (sig2_c * sig_c)[:, None]
    l1_h = -0.5 * np.log(2.0 * np.pi) - np.log(sig_h)[:, None] - 0.5 * d_h * d_h / m2[:, None]
    l1_c = -0.5 * np.log(2.0 * np.pi) - np.log(sig_c)[:, None] - 0.5 * d_c * d_c / sig2_c[:, None]
    dq0_e = ((l1_h - l1_c) * s_h0).sum(1)
    dq1_e = ((l1_h - l1_c) * s_h1).sum(1)
    u_hat_arr, ok_uh = _u_rows(
        (s_h0 * s_h0).sum(1), (s_h0 * s_h1).sum(1), (s_h1 * s_h1).sum(1),
        j00, j01, j11, dq0_e, dq1_e,
        (s_c1 * s_h0).sum(1), (s_c1 * s_h1).sum(1),
        jlam, detj, sign_r,
    )

    # expected covariances in closed form via the quadratic-moment helpers
    s_polys_h = _normal_score_polys(th_h, th_h)
    i_exp = n * _poly_cross(s_polys_h, s_polys_h, sig_h)
    q_h = n * _poly_cross(_normal_loglik_poly(th_h, th_h)[..., None, :],
                          s_polys_h, sig_h)[..., 0, :]
    q_c = n * _poly_cross(_normal_loglik_poly(th_c, th_h)[..., None, :],
                          s_polys_h, sig_h)[..., 0, :]
    big = n * _poly_cross(_normal_score_polys(th_c, th_h), s_polys_h, sig_h)
    u_bar_arr, ok_ub = _u_rows(
        i_exp[:, 0, 0], i_exp[:, 0, 1], i_exp[:, 1, 1],
        j00, j01, j11, q_h[:, 0] - q_c[:, 0], q_h[:, 1] - q_c[:, 1],
        big[:, 1, 0], big[:, 1, 1],
        jlam, detj, sign_r,
    )

    rbar, ok_b = _rstar_direct(r, u_bar_arr)
    rhat, ok_h = _rstar_direct(r, u_hat_arr)
    ok = valid & np.isfinite(r) & ok_uh & ok_ub & ok_b & ok_h
    return r, rbar, rhat, ok


# -- generic per-replicate fallback ------------------------------------------

def _generic_chunk(model: ParametricModel, theta, n, seed, start, count):
    theta = np.asarray(theta, dtype=float)
    r = np.full(count, np.nan)
    ub = np.full(count, np.nan)
    uh = np.full(count, np.nan)
    for i in range(count):
        stream = RngStream(seed, start + i)
        try:
            data = model.sample(theta, n, stream)
            full = fit_full(model, data)
            con = fit_constrained(model, data, float(theta[0]))
            r[i] = signed_lrt(full, con)
            ub[i] = u_bar(model, data, full, con)
            uh[i] = u_hat(model, data, full, con)
        except SignedRootError:
            continue
    rbar, ok_b = _rstar_direct(r, ub)
    rhat, ok_h = _rstar_direct(r, uh)
    ok = np.isfinite(r) & ok_b & ok_h
    return r, rbar, rhat, ok


_BATCH_ENGINES = {
    "linexp": _linexp_chunk,
    "normal": _normal_chunk,
}


def _compute_chunk(model_id, theta, n, seed, start, count):
    engine = _BATCH_ENGINES.get(model_id)
    if engine is not None:
        return engine(theta, n, seed, start, count)
    return _generic_chunk(get_model(model_id), theta, n, seed, start, count)


def _collect(model_id, theta, n, replicates, master_seed, workers=1):
    """All replicate statistics for one sampling design, in replicate order."""
    seed = derive_seed(model_id, theta, n, master_seed)
    spans = [(s, min(CHUNK, replicates - s)) for s in range(0, replicates, CHUNK)]
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda sp: _compute_chunk(model_id, theta, n, seed, sp[0], sp[1]),
                spans,
            ))
    else:
        parts = [_compute_chunk(model_id, theta, n, seed, s, c) for s, c in spans]
    r = np.concatenate([p[0] for p in parts])
    rbar = np.concatenate([p[1] for p in parts])
    rhat = np.concatenate([p[2] for p in parts])
    ok = np.concatenate([p[3] for p in parts])
    return {"R": r, "Rbar": rbar, "Rhat": rhat}, ok


# ---------------------------------------------------------------------------
# public study types and operations
# ---------------------------------------------------------------------------

def _check_levels(levels):
    levels = tuple(float(p) for p in levels)
    if not levels:
        raise InvalidInputError("at least one probability level is required")
    if any(not 0.0 < p < 1.0 for p in levels):
        raise InvalidInputError(f"levels must lie in (0, 1), got {levels}")
    return levels


def _check_kinds(kinds):
    kinds = tuple(kinds)
    if not kinds:
        raise InvalidInputError("at least one statistic kind is required")
    bad = [k for k in kinds if k not in KINDS]
    if bad:
        raise InvalidInputError(
            f"unknown statistic kinds {bad}; expected a subset of {list(KINDS)}"
        )
    if len(set(kinds)) != len(kinds):
        raise InvalidInputError("statistic kinds must be distinct")
    return kinds


@dataclass(frozen=True)
class CoverageSpec:
    """Full description of one coverage study; the report is a pure function
    of this record. workers is a throughput hint and never changes values."""

    model_id: str
    theta_true: tuple
    n: int
    replicates: int
    levels: tuple = (0.010, 0.025, 0.050, 0.100, 0.900, 0.950, 0.975, 0.990)
    kinds: tuple = KINDS
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        model = get_model(self.model_id)
        theta = tuple(float(v) for v in self.theta_true)
        model.require_domain(theta)
        object.__setattr__(self, "theta_true", theta)
        if self.n < model.k + 1:
            raise InvalidInputError(f"n must be at least {model.k + 1}")
        if self.replicates < 1:
            raise InvalidInputError("replicate count must be >= 1")
        object.__setattr__(self, "levels", _check_levels(self.levels))
        object.__setattr__(self, "kinds", _check_kinds(self.kinds))
        if self.workers < 1:
            raise InvalidInputError("workers hint must be >= 1")


@dataclass(frozen=True)
class CoverageReport:
    """Coverage estimates per (kind, level) with Monte Carlo standard errors.

    failures counts replicates excluded from every kind; valid is False when
    they exceed the 0.1% ceiling. The spec echo omits the workers hint,
    which by contract cannot influence any value.
    """

    model_id: str
    theta_true: tuple
    n: int
    replicates: int
    levels: tuple
    kinds: tuple
    master_seed: int
    coverage: dict
    mc_se: dict
    failures: int
    valid: bool

    def to_dict(self) -> dict:
        return {
            "model": self.model_id,
            "theta": list(self.theta_true),
            "n": self.n,
            "replicates": self.replicates,
            "levels": list(self.levels),
            "kinds": list(self.kinds),
            "seed": self.master_seed,
            "coverage": {k: {f"{p:g}": self.coverage[k][p] for p in self.levels}
                         for k in self.kinds},
            "mc_se": {k: {f"{p:g}": self.mc_se[k][p] for p in self.levels}
                      for k in self.kinds},
            "failures": self.failures,
            "valid": self.valid,
        }


def coverage_study(spec: CoverageSpec) -> CoverageReport:
    """Estimate one-sided coverage for each requested kind and level.

    Each replicate: sample n observations on its own stream, fit, evaluate
    every statistic once at the true interest value, then compare against
    each level's normal quantile. Exclusions are shared across kinds.
    """
    stats, ok = _collect(spec.model_id, spec.theta_true, spec.n,
                         spec.replicates, spec.master_seed, spec.workers)
    n_ok = int(ok.sum())
    failures = spec.replicates - n_ok
    valid = failures < FAILURE_CEILING * spec.replicates
    coverage: dict = {}
    mc_se: dict = {}
    for kind in spec.kinds:
        vals = stats[kind][ok]
        coverage[kind] = {}
        mc_se[kind] = {}
        for p in spec.levels:
            z = float(normal_quantile(1.0 - p))
            est = float(np.mean(vals >= z)) if n_ok else float("nan")
            coverage[kind][p] = est
            mc_se[kind][p] = (float(np.sqrt(est * (1.0 - est) / n_ok))
                              if n_ok else float("nan"))
    return CoverageReport(
        model_id=spec.model_id,
        theta_true=spec.theta_true,
        n=spec.n,
        replicates=spec.replicates,
        levels=spec.levels,
        kinds=spec.kinds,
        master_seed=spec.master_seed,
        coverage=coverage,
        mc_se=mc_se,
        failures=failures,
        valid=valid,
    )


@dataclass(frozen=True)
class NormalityDiagnostic:
    """Distance of each statistic's replicate distribution from standard
    normal: Kolmogorov-Smirnov statistic plus moment summaries."""

    model_id: str
    theta_true: tuple
    n: int
    replicates: int
    master_seed: int
    per_kind: dict
    failures: int

    def to_dict(self) -> dict:
        return {
            "model": self.model_id,
            "theta": list(self.theta_true),
            "n": self.n,
            "replicates": self.replicates,
            "seed": self.master_seed,
            "statistics": {k: dict(v) for k, v in self.per_kind.items()},
            "failures": self.failures,
        }


def _ks_to_normal(values: np.ndarray) -> float:
    x = np.sort(values)
    m = x.size
    cdf = normal_cdf(x)
    grid = np.arange(1, m + 1) / m
    return float(np.max(np.maximum(grid - cdf, cdf - (grid - 1.0 / m))))


def normality_diagnostic(model_id: str, theta_true, n: int, replicates: int,
                         master_seed: int = 0) -> NormalityDiagnostic:
    """Simulate all three statistics at the true interest value and compare
    each with the standard normal reference."""
    model = get_model(model_id)
    theta = tuple(float(v) for v in theta_true)
    model.require_domain(theta)
    if replicates < 1:
        raise InvalidInputError("replicate count must be >= 1 for a diagnostic")
    if n < model.k + 1:
        raise InvalidInputError(f"n must be at least {model.k + 1}")
    stats, ok = _collect(model_id, theta, n, replicates, master_seed)
    if not ok.any():
        raise InvalidInputError("no replicate produced usable statistics")
    per_kind = {}
    for kind in KINDS:
        v = stats[kind][ok]
        mean = float(np.mean(v))
        var = float(np.var(v))
        m3 = float(np.mean((v - mean) ** 3))
        per_kind[kind] = {
            "ks": _ks_to_normal(v),
            "mean": mean,
            "variance": var,
            "skewness": m3 / var ** 1.5 if var > 0 else float("nan"),
        }
    return NormalityDiagnostic(
        model_id=model_id,
        theta_true=theta,
        n=n,
        replicates=replicates,
        master_seed=master_seed,
        per_kind=per_kind,
        failures=int(replicates - ok.sum()),
    )


@dataclass(frozen=True)
class RateProbe:
    """How fast the two modified statistics approach each other as n grows:
    median |Rhat - Rbar| per n and the log-log slope (theory: about -1)."""

    model_id: str
    theta_true: tuple
    n_list: tuple
    replicates: int
    master_seed: int
    medians: dict
    slope: float
    failures: dict

    def to_dict(self) -> dict:
        return {
            "model": self.model_id,
            "theta": list(self.theta_true),
            "n_list": list(self.n_list),
            "replicates": self.replicates,
            "seed": self.master_seed,
            "median_gap": {str(n): self.medians[n] for n in self.n_list},
            "slope": self.slope,
            "failures": {str(n): self.failures[n] for n in self.n_list},
        }


def rate_probe(model_id: str, theta_true, n_list, replicates: int,
               master_seed: int = 0) -> RateProbe:
    """Median |Rhat - Rbar| across replicates at each n, plus a slope fit."""
    model = get_model(model_id)
    theta = tuple(float(v) for v in theta_true)
    model.require_domain(theta)
    n_list = tuple(int(n) for n in n_list)
    if len(n_list) < 2:
        raise InvalidInputError("rate probe needs at least two sample sizes")
    if len(set(n_list)) < 2:
        raise InvalidInputError("rate probe needs two distinct sample sizes")
    if any(n < model.k + 1 for n in n_list):
        raise InvalidInputError(f"every n must be at least {model.k + 1}")
    if replicates < 1:
        raise InvalidInputError("replicate count must be >= 1")
    medians = {}
    failures = {}
    for n in n_list:
        stats, ok = _collect(model_id, theta, n, replicates, master_seed)
        if not ok.any():
            raise InvalidInputError(f"no usable replicates at n={n}")
        gap = np.abs(stats["Rhat"][ok] - stats["Rbar"][ok])
        medians[n] = float(np.median(gap))
        failures[n] = int(replicates - ok.sum())
    xs = np.log(np.array(sorted(set(n_list)), dtype=float))
    ys = np.log(np.array([max(medians[n], 1e-300) for n in sorted(set(n_list))]))
    slope = float(np.polyfit(xs, ys, 1)[0])
    return RateProbe(
        model_id=model_id,
        theta_true=theta,
        n_list=n_list,
        replicates=replicates,
        master_seed=master_seed,
        medians=medians,
        slope=slope,
        failures=failures,
    )
