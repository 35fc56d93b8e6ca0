"""Numerically exact CDF of Q = sum_n lambda_n xi_n^2 (xi_n i.i.d. N(0,1)).

Two routes, both operating on a certified truncation Q_N with discarded
tail mass <= 1e-3 * r:

* cdf_inversion: characteristic-function inversion

      P = 1/2 - (1/pi) * int_0^inf sin(theta(u)) / (u * rho(u)) du,
      theta(u) = (1/2) sum arctan(lambda_n u) - r u / 2,
      rho(u)   = prod (1 + lambda_n^2 u^2)^(1/4).

  theta is unimodal, so the integrand's sign changes are enumerated by
  root-finding theta = k*pi; each arch is integrated adaptively and the
  alternating arch series is either cut off by a rigorous envelope bound
  or summed by repeated averaging.  In double precision the 1/2 - I/pi
  form cancels below P ~ 1e-10, so in that regime the same quantity is
  computed instead from the Laplace inversion contour through the real
  saddle point u(r), where every sample of the integrand already carries
  the factor exp(L(u)+ur) and no cancellation occurs.

* cdf_monte_carlo / sample_norm_squared: direct simulation of Q_N with a
  deterministic, chunked counter-based RNG substream layout (results
  depend only on the seed and the sample count, not on execution order).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, OutOfRegimeError, PrecisionLimitError, UsageError
from .spectra import Spectrum

__all__ = ["CdfResult", "cdf_inversion", "cdf_monte_carlo", "sample_norm_squared"]

TAIL_BUDGET_FACTOR = 1e-3  # discarded tail mass <= this times r
DEEP_LOG_SWITCH = math.log(1e-9)  # below this log-probability, use the contour route

_GL16 = np.polynomial.legendre.leggauss(16)
_GL32 = np.polynomial.legendre.leggauss(32)

_MC_CHUNK = 32768
_MC_BLOCK = 1024


@dataclass(frozen=True)
class CdfResult:
    """CDF value with method tag and an absolute error indicator.

    truncation_n is the number of eigenvalues used, tail_mass the discarded
    sum; err combines the quadrature bound (or Monte Carlo standard error)
    with a density-based bound for the truncation shift.
    """

    r: float
    probability: float
    method: str
    err: float
    truncation_n: int
    tail_mass: float

    def __post_init__(self):
        if not (0.0 <= self.probability <= 1.0):
            raise DomainError("probability outside [0, 1]")
        if self.err < 0:
            raise DomainError("error indicator must be non-negative")

    @staticmethod
    def csv_header() -> list[str]:
        return ["r", "probability", "method", "err", "truncation_N", "tail_mass"]

    def csv_row(self) -> list[str]:
        return [
            repr(float(self.r)),
            repr(float(self.probability)),
            self.method,
            repr(float(self.err)),
            str(self.truncation_n),
            repr(float(self.tail_mass)),
        ]


# -- oscillatory real-axis route ------------------------------------------------


def _adaptive_arch(f, a, b, abs_tol, depth=0):
    """Integrate one smooth arch by nested Gauss rules with bisection."""
    xm, wm = _GL16
    xh, wh = _GL32
    m = 0.5 * (b - a)
    c = 0.5 * (b + a)
    i16 = m * float(wm @ f(c + m * xm))
    i32 = m * float(wh @ f(c + m * xh))
    err = abs(i32 - i16)
    if err <= max(abs_tol, 1e-15 * abs(i32)) or depth >= 14:
        return i32, err
    left = _adaptive_arch(f, a, c, 0.5 * abs_tol, depth + 1)
    right = _adaptive_arch(f, c, b, 0.5 * abs_tol, depth + 1)
    return left[0] + right[0], left[1] + right[1]


def _integrate_panelled(f, a, b, abs_tol, scale):
    """Adaptive integration of [a, b] after a geometric pre-split.

    Arches can span many decades while the integrand's structure sits near
    `scale`; bisection alone cannot reach it from the far end, so panels of
    bounded ratio anchored at `scale` are refined independently.
    """
    lo = max(a, scale / 256.0)
    if b <= 0 or b <= 4.0 * lo:
        return _adaptive_arch(f, a, b, abs_tol)
    start = max(a, lo)
    k = max(1, math.ceil(math.log(b / start) / math.log(4.0)))
    edges = [a] + [start * (b / start) ** (j / k) for j in range(1, k)] + [b]
    total = 0.0
    err = 0.0
    for aa, bb in zip(edges[:-1], edges[1:]):
        v, e = _adaptive_arch(f, aa, bb, abs_tol / k)
        total += v
        err += e
    return total, err


def _averaged_tail(terms):
    """Repeated averaging of the partial sums of an alternating series."""
    S = np.cumsum(terms)
    best = S[-1]
    err = abs(terms[-1])
    while len(S) > 1:
        S = 0.5 * (S[:-1] + S[1:])
        if len(S) >= 2:
            step = abs(S[-1] - S[-2])
            if step < err:
                err = step
                best = S[-1]
    return float(best), float(err)


def _gil_pelaez(lams: np.ndarray, r: float, tol: float):
    """Returns (P, err_quad, err_tail, density_estimate)."""
    total = float(np.asarray(lams, float).sum())
    # exactly equal eigenvalues collapse to (value, multiplicity): chi-square
    # style spectra then cost O(1) per integrand sample instead of O(N)
    lams, mult = np.unique(np.asarray(lams, float), return_counts=True)
    mult = mult.astype(float)
    lam_sq = lams**2

    def theta(u: float) -> float:
        return 0.5 * float(mult @ np.arctan(lams * u)) - 0.5 * r * u

    def theta_prime(u: float) -> float:
        return 0.5 * float(mult @ (lams / (1.0 + lam_sq * u * u))) - 0.5 * r

    def ln_rho(u: float) -> float:
        return 0.25 * float(mult @ np.log1p(lam_sq * u * u))

    def integrand(u: np.ndarray) -> np.ndarray:
        u = np.atleast_1d(u)
        th = 0.5 * (mult @ np.arctan(np.multiply.outer(lams, u))) - 0.5 * r * u
        lr = 0.25 * (mult @ np.log1p(np.multiply.outer(lam_sq, u * u)))
        out = np.sin(th) * np.exp(-lr)
        np.divide(out, u, out=out, where=u > 0)
        out[u == 0] = 0.5 * (total - r)
        return out

    def dens_integrand(u: np.ndarray) -> np.ndarray:
        u = np.atleast_1d(u)
        th = 0.5 * (mult @ np.arctan(np.multiply.outer(lams, u))) - 0.5 * r * u
        lr = 0.25 * (mult @ np.log1p(np.multiply.outer(lam_sq, u * u)))
        return np.cos(th) * np.exp(-lr)

    def envelope_bound(u: float) -> float:
        # ln(1+lam^2 v^2) is convex in ln v, so the tangent at u gives
        # rho(v) >= rho(u) * (v/u)^(gamma/2) with the exact local slope
        # gamma = sum (lam*u)^2/(1+(lam*u)^2); hence
        # int_u^inf dv/(v*rho(v)) <= 2/(gamma*rho(u))
        x = lam_sq * u * u
        gamma = float(mult @ (x / (1.0 + x)))
        if gamma <= 0.1:
            return math.inf
        ln_b = math.log(2.0 / gamma) - ln_rho(u)
        return math.exp(ln_b) if ln_b < 700 else math.inf

    # unimodal phase: peak and crossing enumeration
    if theta_prime(0.0) > 0:
        lo, hi = 0.0, 1.0
        while theta_prime(hi) > 0:
            lo = hi
            hi *= 2.0
        u_peak = brentq(theta_prime, lo, hi, rtol=1e-13)
        th_peak = theta(u_peak)
    else:
        u_peak, th_peak = 0.0, 0.0

    points = [0.0]
    k = 1
    while k * math.pi < th_peak:
        points.append(brentq(lambda u: theta(u) - k * math.pi, points[-1], u_peak, rtol=1e-13))
        k += 1

    level = math.floor(th_peak / math.pi)
    while level * math.pi >= th_peak:
        level -= 1
    u_lo = max(u_peak, points[-1], 1e-12)
    hi_guess = max(2.0 * u_lo, 1.0)
    tail_bound = math.inf
    stopped_by_bound = False
    max_arches = 256
    n_fall = 0
    while n_fall < max_arches:
        target = level * math.pi
        b = hi_guess
        while theta(b) > target:
            b *= 2.0
        x = brentq(lambda u: theta(u) - target, u_lo, b, rtol=1e-13)
        points.append(x)
        u_lo, hi_guess = x, 2.0 * x
        level -= 1
        n_fall += 1
        tail_bound = envelope_bound(x)
        if tail_bound < 0.25 * tol:
            stopped_by_bound = True
            break

    seg_tol = tol / 1024.0
    u_knee = 1.0 / float(lams[-1])  # decay scale set by the largest eigenvalue
    raw, raw_d, quad_err = [], [], 0.0
    for a, b in zip(points[:-1], points[1:]):
        v, e = _integrate_panelled(integrand, a, b, seg_tol, u_knee)
        raw.append(v)
        quad_err += e
        vd, _ = _integrate_panelled(dens_integrand, a, b, seg_tol, u_knee)
        raw_d.append(vd)

    if stopped_by_bound:
        I = float(np.sum(raw))
        err_tail = tail_bound
        J = float(np.sum(raw_d))
    else:
        # alternating arch series: sum the head, accelerate the tail
        start = len(raw)
        for i in range(len(raw) - 1, 0, -1):
            if raw[i] * raw[i - 1] < 0:
                start = i - 1
            else:
                break
        if len(raw) - start >= 6:
            tail_val, tail_err = _averaged_tail(np.asarray(raw[start:]))
            I = float(np.sum(raw[:start])) + tail_val
            err_tail = 3.0 * tail_err
            Jt, _ = _averaged_tail(np.asarray(raw_d[start:]))
            J = float(np.sum(raw_d[:start])) + Jt
        else:
            I = float(np.sum(raw))
            err_tail = abs(raw[-1]) if raw else 0.0
            J = float(np.sum(raw_d))

    P = 0.5 - I / math.pi
    density = max(J / (2.0 * math.pi), 0.0)
    return P, quad_err / math.pi, err_tail / math.pi, density


# -- saddle-contour route for the deep regime -----------------------------------


def _solve_saddle_arr(lams: np.ndarray, mult: np.ndarray, r: float):
    lo, hi = 0.0, 1.0

    def l1l2(u):
        t = 1.0 / (1.0 + 2.0 * u * lams)
        lt = lams * t
        return -float(mult @ lt), 2.0 * float(mult @ (lt * lt))

    while l1l2(hi)[0] <= -r:
        lo = hi
        hi *= 2.0
    u = 0.5 * (lo + hi)
    for _ in range(300):
        L1, L2 = l1l2(u)
        g = L1 + r
        if abs(g) <= 1e-12 * r:
            break
        if g < 0:
            lo = u
        else:
            hi = u
        step = u - g / L2
        u = step if lo < step < hi else 0.5 * (lo + hi)
    L = -0.5 * float(mult @ np.log1p(2.0 * u * lams))
    return u, L, L2


def _bromwich_saddle(lams: np.ndarray, r: float):
    """Laplace CDF inversion along Re(s) = u(r); returns (log_P, P, err_rel, density).

    On that line |exp(Lambda(s))| <= exp(L(u)+ur) pointwise, so the integral
    is evaluated entirely in units of the final answer: no cancellation at
    any probability scale.  A Gaussian core around t=0 is integrated on
    geometric panels; beyond it the integrand's sign arches are marched out
    (the phase rate is bounded by 2r + 1/u via the saddle identity) and the
    alternating arch series is cut off by its decay envelope or accelerated
    by repeated averaging.
    """
    lams, mult = np.unique(np.asarray(lams, float), return_counts=True)
    mult = mult.astype(float)
    u, L, L2 = _solve_saddle_arr(lams, mult, r)
    log_scale = L + u * r
    q = 2.0 * lams / (1.0 + 2.0 * lams * u)  # ln(1+2*lam*s) = const + ln(1+i*q*t)
    q_sq = q * q

    def parts(t: np.ndarray):
        t = np.atleast_1d(t)
        re = -0.25 * (mult @ np.log1p(np.multiply.outer(q_sq, t * t)))
        im = r * t - 0.5 * (mult @ np.arctan(np.multiply.outer(q, t)))
        return re, im

    def g_prob(t: np.ndarray) -> np.ndarray:
        t = np.atleast_1d(t)
        re, im = parts(t)
        amp = np.exp(re) * u / np.hypot(u, t)
        return amp * np.cos(im - np.arctan2(t, u))

    def tail_bound_at(t: float) -> float:
        # Re-exponent is concave in ln v (tangent bound as on the real axis):
        # |g(v)| <= exp(re(t)) * (t/v)^(gc/2) * u/v for v >= t, and
        # int_t^inf (u/v) (t/v)^(gc/2) dv = 2u/gc
        x = q_sq * t * t
        gc = float(mult @ (x / (1.0 + x)))
        if gc <= 0.1:
            return math.inf
        re, _ = parts(np.asarray([t]))
        return float(np.exp(re[0])) * 2.0 * u / gc

    sigma = 1.0 / math.sqrt(L2)
    arch_tol = 1e-13 * sigma  # the integral's natural scale is sigma
    t_core = 8.0 * sigma
    edges = np.concatenate([[0.0], np.geomspace(sigma / 8.0, t_core, 24)])
    I = 0.0
    Ierr = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = _adaptive_arch(g_prob, a, b, arch_tol)
        I += v
        Ierr += e
    # density of Q at r for the truncation indicator: saddle approximation
    density = math.exp(log_scale) / math.sqrt(2.0 * math.pi * L2)

    # arch marching beyond the core; phase rate |Phi'| <= 2r + 1/u
    step = math.pi / (2.0 * (2.0 * r + 1.0 / u)) * 0.8
    t_cur = t_core
    g_cur = float(g_prob(np.asarray([t_cur]))[0])
    arches = []
    arch_start = t_cur
    n_zero = 0
    max_zero = 160
    while n_zero < max_zero:
        t_next = t_cur + step
        g_next = float(g_prob(np.asarray([t_next]))[0])
        if g_cur == 0.0 or g_cur * g_next < 0:
            z = brentq(lambda s: float(g_prob(np.asarray([s]))[0]), t_cur, t_next, rtol=1e-12)
            v, e = _integrate_panelled(g_prob, arch_start, z, arch_tol, sigma)
            arches.append(v)
            Ierr += e
            arch_start = z
            n_zero += 1
            rem = tail_bound_at(z)
            if rem < 1e-13 * max(abs(I + sum(arches)), 1e-300):
                I += float(np.sum(arches))
                Ierr += rem
                break
        t_cur, g_cur = t_next, g_next
    else:
        # slow algebraic decay (few eigenvalues): accelerate the alternating tail
        start = len(arches)
        for i in range(len(arches) - 1, 0, -1):
            if arches[i] * arches[i - 1] < 0:
                start = i - 1
            else:
                break
        if len(arches) - start >= 6:
            tail_val, tail_err = _averaged_tail(np.asarray(arches[start:]))
            I += float(np.sum(arches[:start])) + tail_val
            Ierr += 3.0 * tail_err
        else:
            I += float(np.sum(arches))
            Ierr += abs(arches[-1]) if arches else 0.0
    if I <= 0:
        raise PrecisionLimitError("contour integral lost positivity")
    log_p = log_scale + math.log(I / (math.pi * u))
    return log_p, math.exp(log_p), Ierr / max(I, 1e-300), density


# -- public operations -----------------------------------------------------------


def _log_probe(spectrum: Spectrum, r: float):
    """(log-probability scale, saddle point) for route and budget selection."""
    from .saddle import solve_saddle

    try:
        st = solve_saddle(spectrum, r)
    except (OutOfRegimeError, DomainError):
        return 0.0, None  # not deep in the small-deviation regime
    log_value = st.L + st.u * r - 0.5 * math.log(2.0 * math.pi * st.u**2 * st.L2)
    return log_value, st.u


def _budget(spectrum: Spectrum, r: float, u_probe: float | None) -> float:
    """Truncation budget: within the 1e-3*r contract, tightened so the CDF
    shift stays ~2% relative — exp(u*tail) in the small-deviation regime,
    tail/sd where the CDF is steepest near the bulk."""
    budget = TAIL_BUDGET_FACTOR * r
    budget = min(budget, 0.02 * math.sqrt(2.0 * spectrum.total_sq_mass()))
    if u_probe is not None:
        budget = min(budget, 0.02 / u_probe)
    return budget


def cdf_inversion(spectrum: Spectrum, r: float, tol: float = 1e-10) -> CdfResult:
    """P{Q_N <= r} by characteristic-function inversion to absolute error ~tol.

    Probabilities below ~1e-10 cannot be resolved by the real-axis form in
    double precision (1/2 - 1/2 cancellation); those are computed on the
    saddle contour instead, which evaluates the same inversion integral in
    units of exp(L(u)+ur).
    """
    if not (r > 0):
        raise DomainError("r must be positive")
    if tol < 1e-12:
        raise PrecisionLimitError(
            "tol below the 1e-12 cancellation floor; for tiny probabilities "
            "use saddle.small_ball_estimate"
        )
    log_scale, u_probe = _log_probe(spectrum, r)
    lams, n, tail_mass = spectrum.truncate_for(_budget(spectrum, r, u_probe))
    if log_scale < DEEP_LOG_SWITCH:
        log_p, p, err_rel, density = _bromwich_saddle(lams, r)
        err = abs(p) * err_rel + tail_mass * density
        return CdfResult(r, min(max(p, 0.0), 1.0), "inversion", err, n, tail_mass)
    p, err_quad, err_tail, density = _gil_pelaez(lams, r, tol)
    if p < 1e-9:  # probe was optimistic; redo without cancellation
        log_p, p, err_rel, density = _bromwich_saddle(lams, r)
        err = abs(p) * err_rel + tail_mass * density
        return CdfResult(r, min(max(p, 0.0), 1.0), "inversion", err, n, tail_mass)
    err = err_quad + err_tail + tail_mass * density
    return CdfResult(r, min(max(p, 0.0), 1.0), "inversion", err, n, tail_mass)


def _draw_q(lams: np.ndarray, n_samples: int, seed: int) -> np.ndarray:
    """Chunked simulation of Q; per-chunk substreams derived from the seed.

    Chunk c uses the generator seeded by SeedSequence(seed, spawn_key=(c,)),
    always drawing full _MC_CHUNK x block panels so the output depends only
    on (seed, n_samples).
    """
    if not (0 <= int(seed) < 2**64):
        raise UsageError("seed must be an unsigned 64-bit integer")
    lams = np.asarray(lams, float)
    out = np.empty(n_samples)
    pos = 0
    chunk = 0
    while pos < n_samples:
        m = min(_MC_CHUNK, n_samples - pos)
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(chunk,)))
        q = np.zeros(_MC_CHUNK)
        for j in range(0, lams.size, _MC_BLOCK):
            block = lams[j : j + _MC_BLOCK]
            z = rng.standard_normal((_MC_CHUNK, block.size))
            q += (z * z) @ block
        out[pos : pos + m] = q[:m]
        pos += m
        chunk += 1
    return out


def sample_norm_squared(
    spectrum: Spectrum, n_samples: int, seed: int
) -> np.ndarray:
    """Raw samples of the truncated squared norm Q_N.

    The truncation keeps the discarded mass below 1e-4 of the total, well
    inside Monte Carlo resolution at any feasible sample count; sample
    moments converge to the truncated trace sums.
    """
    if n_samples < 1:
        raise UsageError("n_samples must be positive")
    lams, _, _ = spectrum.truncate_for(1e-4 * spectrum.total_mass())
    return _draw_q(lams, n_samples, seed)


def cdf_monte_carlo(
    spectrum: Spectrum, r: float, n_samples: int, seed: int
) -> CdfResult:
    """Empirical P{Q_N <= r} with binomial standard error as err."""
    if not (r > 0):
        raise DomainError("r must be positive")
    if n_samples < 1000:
        raise UsageError("n_samples must be at least 1000")
    lams, n, tail_mass = spectrum.truncate_for(_budget(spectrum, r, None))
    q = _draw_q(lams, n_samples, seed)
    p = float(np.count_nonzero(q <= r)) / n_samples
    se = math.sqrt(p * (1.0 - p) / n_samples)
    return CdfResult(r, p, "monte_carlo", se, n, tail_mass)
