"""Saddle-point small-deviation estimates from the log-Laplace transform.

For Q = sum_n lambda_n xi_n^2 the log-Laplace transform of the squared norm is

    L(u)  = -(1/2) sum_n ln(1 + 2 u lambda_n)        (so E exp(-uQ) = exp(L(u)))
    L'(u) = - sum_n lambda_n / (1 + 2 u lambda_n)
    L''(u) = sum_n 2 lambda_n^2 / (1 + 2 u lambda_n)^2

The saddle point u(r) is the unique root of L'(u) + r = 0 (unique because
L'' > 0), and the exact small-deviation estimate is

    P{Q <= r}  ~  exp(L(u) + u r) / sqrt(2 pi u^2 L''(u)),    r -> 0,

with logarithmic form ln P ~ L(u) + u r.  Head sums are direct; parametric
tails are evaluated by the certified machinery in `tails`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OutOfRegimeError
from .spectra import Spectrum

__all__ = [
    "SaddleState",
    "SmallBallEstimate",
    "laplace_functionals",
    "solve_saddle",
    "small_ball_estimate",
    "log_small_ball_estimate",
]

_RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class SaddleState:
    """Solved saddle point: (r, u, L(u), L'(u), L''(u))."""

    r: float
    u: float
    L: float
    L1: float
    L2: float

    def __post_init__(self):
        if not (self.u > 0 and self.L <= 0 and self.L1 < 0 and self.L2 > 0):
            raise DomainError("saddle state violates sign invariants")

    def csv_row(self) -> list[str]:
        return [repr(float(v)) for v in (self.r, self.u, self.L, self.L1, self.L2)]

    @staticmethod
    def csv_header() -> list[str]:
        return ["r", "u", "L", "L1", "L2"]


@dataclass(frozen=True)
class SmallBallEstimate:
    """Asymptotic estimate; `value` may underflow to 0, `log_value` never does."""

    r: float
    value: float
    log_value: float
    method: str
    err: float

    def csv_row(self) -> list[str]:
        v = self.log_value if self.method == "log_saddle" else self.value
        return [repr(float(self.r)), repr(float(v)), self.method, repr(float(self.err)), "0", "0.0"]


def _l1_l2(spectrum: Spectrum, u: float) -> tuple[float, float]:
    lam = spectrum.head
    t = 1.0 / (1.0 + 2.0 * u * lam)
    lt = lam * t
    L1 = -float(lt.sum())
    L2 = 2.0 * float((lt * lt).sum())
    if spectrum.tail is not None:
        _, s1, s2 = spectrum.tail.functional_sums(u, spectrum.tail_start)
        L1 -= s1
        L2 += 2.0 * s2
    return L1, L2


def laplace_functionals(spectrum: Spectrum, u: float) -> tuple[float, float, float]:
    """(L(u), L'(u), L''(u)), all from one pass over the spectrum."""
    if u < 0:
        raise DomainError("u must be non-negative")
    lam = spectrum.head
    t = 1.0 / (1.0 + 2.0 * u * lam)
    lt = lam * t
    L = -0.5 * float(np.log1p(2.0 * u * lam).sum())
    L1 = -float(lt.sum())
    L2 = 2.0 * float((lt * lt).sum())
    if spectrum.tail is not None:
        s0, s1, s2 = spectrum.tail.functional_sums(u, spectrum.tail_start)
        L -= 0.5 * s0
        L1 -= s1
        L2 += 2.0 * s2
    return L, L1, L2


def solve_saddle(spectrum: Spectrum, r: float) -> SaddleState:
    """Unique u > 0 with L'(u) = -r, by bracketing plus safeguarded Newton.

    L' is increasing (L'' > 0) from -total_mass at u=0 toward 0, so a root
    exists iff 0 < r < total_mass.  Newton steps are accepted only inside
    the current bracket; the relative residual ends below 1e-10.
    """
    if not (r > 0):
        raise DomainError("r must be positive")
    total = spectrum.total_mass()
    if r >= total:
        raise OutOfRegimeError(
            f"r={r:.6g} is not below the total eigenvalue mass {total:.6g}; "
            "the small-deviation regime requires r < sum(lambda_n)"
        )
    lo = 0.0
    hi = 1.0
    while _l1_l2(spectrum, hi)[0] <= -r:
        lo = hi
        hi *= 2.0
        if hi > 1e300:
            raise OutOfRegimeError("saddle bracket exceeded float range")
    u = 0.5 * (lo + hi)
    for _ in range(300):
        L1, L2 = _l1_l2(spectrum, u)
        g = L1 + r
        if abs(g) <= 0.5 * _RESIDUAL_RTOL * r:
            break
        if g < 0:
            lo = u
        else:
            hi = u
        step = u - g / L2
        u = step if lo < step < hi else 0.5 * (lo + hi)
    L, L1, L2 = laplace_functionals(spectrum, u)
    if abs(L1 + r) > _RESIDUAL_RTOL * r:
        raise OutOfRegimeError(
            f"saddle solve stalled: residual {abs(L1 + r):.3e} at u={u:.6g}"
        )
    return SaddleState(r=r, u=u, L=L, L1=L1, L2=L2)


def small_ball_estimate(spectrum: Spectrum, r: float) -> SmallBallEstimate:
    """Probability-scale estimate exp(L+ur)/sqrt(2 pi u^2 L''), method 'saddle'.

    err carries the saddle-equation residual, not an error bar: the formula
    is asymptotic and its finite-r accuracy is reported by tests, not
    asserted here.
    """
    st = solve_saddle(spectrum, r)
    log_value = (st.L + st.u * r) - 0.5 * np.log(2.0 * np.pi * st.u**2 * st.L2)
    return SmallBallEstimate(
        r=r,
        value=float(np.exp(log_value)),
        log_value=float(log_value),
        method="saddle",
        err=abs(st.L1 + r),
    )


def log_small_ball_estimate(spectrum: Spectrum, r: float) -> float:
    """Logarithmic estimate ln P ~ L(u) + u r at the solved saddle."""
    st = solve_saddle(spectrum, r)
    return float(st.L + st.u * r)
