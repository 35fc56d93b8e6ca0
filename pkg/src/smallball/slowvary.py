"""Log-asymptotics for spectra whose counting function varies slowly at zero.

For a counting function N(lambda) ~ phi(lambda) with phi slowly varying
(phi(c*t)/phi(t) -> 1 as t -> 0 for every c > 0), the logarithmic
small-deviation asymptotics reduce to

    ln P{Q <= r}  ~  -psi(1/u)/2,   psi(x) = int_x^1 phi(z) dz/z,

where u solves phi(1/u)/(2u) = r.  The module provides the phi catalog,
psi (closed forms where available, substitution quadrature otherwise),
the root solve, and the three-case counting asymptotics of the stationary
family with spectral density exp(-C|xi|^alpha):

    alpha < 1:  phi(lam) = ln^(1/alpha)(1/lam) / (pi C^(1/alpha))
    alpha = 1:  phi(lam) = ln(1/lam) / (pi * G),  G = K(sech(pi/2C))/K(tanh(pi/2C))
    alpha > 1:  phi(lam) = (1/(2-2/alpha)) * ln(1/lam)/lnln(1/lam)

together with the corresponding epsilon-scale closed forms, and the
complete elliptic integral K by the arithmetic-geometric mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy.integrate import quad
from scipy.special import expi

from .errors import DomainError, OutOfRegimeError, UsageError

__all__ = [
    "SlowVaryingPhi",
    "RcAlphaParams",
    "psi",
    "solve_u_slowvary",
    "log_asymp_slowvary",
    "rc_alpha_counting",
    "rc_alpha_log_asymp",
    "elliptic_K",
    "elliptic_K_ratio",
]


@dataclass(frozen=True)
class SlowVaryingPhi:
    """Slowly varying counting asymptote phi(lambda) on (lam_min, lam_max).

    kind: 'log_power'        phi = c * ln(1/lam)**beta
          'log_over_loglog'  phi = c * ln(1/lam)/lnln(1/lam)
          'custom'           arbitrary callable
    """

    kind: str
    c: float = 1.0
    beta: float = 1.0
    func: Callable[[float], float] | None = None
    lam_min: float = 0.0
    lam_max: float = 1.0

    def __post_init__(self):
        if self.kind in ("log_power", "log_over_loglog"):
            if not (self.c > 0):
                raise DomainError("phi coefficient c must be positive")
            if self.kind == "log_power" and not (self.beta > 0):
                raise DomainError("log_power exponent beta must be positive")
        elif self.kind == "custom":
            if self.func is None:
                raise UsageError("custom phi requires a callable")
        else:
            raise UsageError(f"unknown phi form '{self.kind}'")
        if not (0.0 <= self.lam_min < self.lam_max <= 1.0):
            raise DomainError("need 0 <= lam_min < lam_max <= 1")

    def __call__(self, lam: float) -> float:
        if not (self.lam_min < lam <= self.lam_max):
            raise DomainError(
                f"phi valid on ({self.lam_min:.3g}, {self.lam_max:.3g}]; got {lam:.3g}"
            )
        w = math.log(1.0 / lam)
        if self.kind == "log_power":
            return self.c * w**self.beta
        if self.kind == "log_over_loglog":
            return self.c * w / math.log(w)
        return float(self.func(lam))

    def to_json_obj(self) -> dict:
        if self.kind == "log_power":
            return {"type": "log_power", "c": self.c, "beta": self.beta}
        if self.kind == "log_over_loglog":
            return {"type": "log_over_loglog", "c": self.c}
        raise UsageError("custom phi objects are not serializable")

    @staticmethod
    def log_power(c: float, beta: float, lam_max: float = 1.0) -> "SlowVaryingPhi":
        return SlowVaryingPhi("log_power", c=c, beta=beta, lam_max=lam_max)

    @staticmethod
    def log_over_loglog(c: float) -> "SlowVaryingPhi":
        # lnln(1/lam) > 1 requires lam < exp(-e); keeps the form positive
        # and monotone throughout its validity range
        return SlowVaryingPhi("log_over_loglog", c=c, lam_max=math.exp(-math.e))

    @staticmethod
    def custom(func, lam_min: float = 0.0, lam_max: float = 1.0) -> "SlowVaryingPhi":
        return SlowVaryingPhi("custom", func=func, lam_min=lam_min, lam_max=lam_max)


@dataclass(frozen=True)
class RcAlphaParams:
    """Parameters of the stationary family with spectral density exp(-C|xi|^alpha)."""

    C: float
    alpha: float

    def __post_init__(self):
        if not (self.C > 0 and self.alpha > 0):
            raise DomainError("need C > 0 and alpha > 0")

    @property
    def case(self) -> str:
        if self.alpha < 1.0:
            return "alpha<1"
        if self.alpha == 1.0:
            return "alpha=1"
        return "alpha>1"


def psi(phi: SlowVaryingPhi, x: float) -> float:
    """psi(x) = int_x^1 phi(z) dz/z.

    Closed forms: log_power gives c*ln^(beta+1)(1/x)/(beta+1); log_over_loglog
    gives c*li(ln^2(1/x)) (principal value, via Ei).  Custom forms are
    integrated adaptively in w = ln(1/z), which flattens the growth of
    phi(z)/z near zero, to absolute tolerance 1e-10.
    """
    if x == 1.0:
        return 0.0
    if not (0.0 < x < 1.0):
        raise DomainError("psi argument must lie in (0, 1)")
    if x <= phi.lam_min:
        raise DomainError(f"psi argument below validity floor {phi.lam_min:.3g}")
    W = math.log(1.0 / x)
    if phi.kind == "log_power":
        return phi.c * W ** (phi.beta + 1.0) / (phi.beta + 1.0)
    if phi.kind == "log_over_loglog":
        if x > phi.lam_max:
            raise DomainError(
                f"psi argument above validity ceiling {phi.lam_max:.3g} "
                "for the log/loglog form"
            )
        # int_0^W w/ln(w) dw = li(W^2) = Ei(2 ln W), principal value
        return phi.c * float(expi(2.0 * math.log(W)))
    val, _ = quad(
        lambda w: phi.func(math.exp(-w)), 0.0, W, epsabs=1e-10, epsrel=1e-11, limit=400
    )
    return float(val)


def solve_u_slowvary(phi: SlowVaryingPhi, r: float) -> float:
    """Exact root u of phi(1/u)/(2u) = r, by bisection to relative 1e-10.

    The equation only pins u up to asymptotic equivalence; the exact root is
    the deterministic admissible choice used throughout.
    """
    if not (r > 0):
        raise DomainError("r must be positive")

    def g(u: float) -> float:
        return phi(1.0 / u) / (2.0 * u)

    u_lo = 1.0 / phi.lam_max
    if phi.kind == "log_power":
        u_lo = max(u_lo, math.exp(phi.beta))  # decreasing branch of ln^beta(u)/u
    elif phi.kind == "log_over_loglog":
        u_lo = max(u_lo, math.exp(math.e) + 1.0)
    if g(u_lo) < r:
        raise OutOfRegimeError(
            f"r={r:.3g} too large: no root with 1/u inside the validity range"
        )
    u_hi = 2.0 * u_lo
    while g(u_hi) >= r:
        u_hi *= 2.0
        if u_hi > 1e300:
            raise OutOfRegimeError("root exceeds floating-point range")
    lo, hi = u_hi / 2.0, u_hi
    while (hi - lo) > 1e-10 * lo:
        mid = 0.5 * (lo + hi)
        if g(mid) >= r:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def log_asymp_slowvary(phi: SlowVaryingPhi, r: float) -> float:
    """ln P{Q <= r} ~ -psi(1/u(r))/2 with u(r) from solve_u_slowvary."""
    u = solve_u_slowvary(phi, r)
    return -0.5 * psi(phi, 1.0 / u)


def rc_alpha_counting(params: RcAlphaParams) -> SlowVaryingPhi:
    """Counting asymptote of the exp(-C|xi|^alpha) family, three exact cases."""
    C, alpha = params.C, params.alpha
    if alpha < 1.0:
        return SlowVaryingPhi.log_power(
            c=1.0 / (math.pi * C ** (1.0 / alpha)), beta=1.0 / alpha
        )
    if alpha == 1.0:
        return SlowVaryingPhi.log_power(
            c=1.0 / (math.pi * elliptic_K_ratio(C)), beta=1.0
        )
    return SlowVaryingPhi.log_over_loglog(c=1.0 / (2.0 - 2.0 / alpha))


def rc_alpha_log_asymp(params: RcAlphaParams, eps: float) -> float:
    """Closed-form ln P{||X|| <= eps} for the exp(-C|xi|^alpha) family.

    alpha < 1:  -(2/C)^(1/alpha) * alpha * ln^((alpha+1)/alpha)(1/eps) / ((alpha+1) pi)
    alpha = 1:  -ln^2(1/eps) / (pi G)
    alpha > 1:  -(1/(2-2/alpha)) * ln^2(1/eps)/lnln(1/eps)   (C drops out)
    """
    if not (0.0 < eps < 1.0):
        raise DomainError("eps must lie in (0, 1)")
    C, alpha = params.C, params.alpha
    w = math.log(1.0 / eps)
    if alpha < 1.0:
        return (
            -((2.0 / C) ** (1.0 / alpha))
            * alpha
            * w ** ((alpha + 1.0) / alpha)
            / ((alpha + 1.0) * math.pi)
        )
    if alpha == 1.0:
        return -(w**2) / (math.pi * elliptic_K_ratio(C))
    if w <= 1.0:
        raise DomainError(
            "alpha>1 form needs ln(1/eps) > 1 (eps < 1/e); lnln is not positive here"
        )
    return -(1.0 / (2.0 - 2.0 / alpha)) * w**2 / math.log(w)


def elliptic_K(k: float) -> float:
    """Complete elliptic integral of the first kind, modulus convention.

    K(k) = pi / (2 * AGM(1, sqrt(1-k^2))), quadratically convergent.
    """
    if not (0.0 <= k < 1.0):
        raise DomainError("modulus must lie in [0, 1)")
    a = 1.0
    b = math.sqrt(1.0 - k * k)
    for _ in range(60):  # quadratic convergence; cap guards ulp oscillation
        if abs(a - b) <= 2.0 * 2.220446049250313e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


def elliptic_K_ratio(C: float) -> float:
    """K(sech(pi/2C)) / K(tanh(pi/2C)); equals 1 where sech = tanh."""
    if not (C > 0):
        raise DomainError("C must be positive")
    x = math.pi / (2.0 * C)
    return elliptic_K(1.0 / math.cosh(x)) / elliptic_K(math.tanh(x))


def phi_from_json(text_obj) -> SlowVaryingPhi:
    """Parse {'type': 'log_power', 'c':..., 'beta':...} or the log/loglog form."""
    import json

    obj = json.loads(text_obj) if isinstance(text_obj, str) else text_obj
    if obj.get("type") == "log_power":
        return SlowVaryingPhi.log_power(float(obj["c"]), float(obj["beta"]))
    if obj.get("type") == "log_over_loglog":
        return SlowVaryingPhi.log_over_loglog(float(obj["c"]))
    raise UsageError(f"unknown phi type {obj.get('type')!r}")
