"""Parametric eigenvalue tail models and certified tail summation.

Two families are supported:

* power:          lambda_n = a * n**(-p),            a > 0, p > 1
* stretched_exp:  lambda_n = s * exp(-C*(pi*n)**alpha), C > 0, alpha > 0, s > 0

Besides plain eigenvalue evaluation, each model provides the tail pieces
needed elsewhere: sums of lambda_n and lambda_n**2 from an index onward,
the inverse counting map, and the three log-Laplace functional sums

    S0 = sum ln(1 + 2*u*lambda_n)
    S1 = sum lambda_n / (1 + 2*u*lambda_n)
    S2 = sum lambda_n**2 / (1 + 2*u*lambda_n)**2

over n >= m, to relative accuracy ~1e-10.  Power tails combine a direct
block sum with a midpoint Euler-Maclaurin remainder (integral evaluated by
a geometric series beyond the knee 2*u*lambda = 1/2, and by quadrature
between); stretched tails decay super-geometrically and are summed
directly until terms fall below 1e-18 of the running total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import zeta

from .errors import DomainError, TruncationError, UnboundedCountError

# Counts above this are treated as unrepresentable (floor guard for counting).
COUNT_CAP = 1.0e15

# Direct-summation block for power tails before switching to Euler-Maclaurin.
_POWER_DIRECT = 20_000

# Hard cap for stretched-tail direct summation.
_STRETCHED_CAP = 1 << 22


@dataclass(frozen=True)
class PowerTail:
    """lambda_n = scale * n**(-exponent) with exponent > 1 (summable)."""

    scale: float
    exponent: float

    def __post_init__(self):
        if not (self.scale > 0):
            raise DomainError("power tail scale must be positive")
        if not (self.exponent > 1):
            raise DomainError("power tail exponent must exceed 1")

    def value(self, n):
        return self.scale * np.asarray(n, dtype=float) ** (-self.exponent)

    def count_floor(self) -> float:
        """Smallest threshold for which the count stays representable."""
        return self.scale * COUNT_CAP ** (-self.exponent)

    def inverse(self, lam: float) -> float:
        """Real y with value(y) = lam; indices n < y have lambda_n > lam."""
        if lam < self.count_floor():
            raise UnboundedCountError(self.count_floor())
        return (self.scale / lam) ** (1.0 / self.exponent)

    def sum_from(self, m: int) -> float:
        """sum_{n>=m} lambda_n (Hurwitz zeta, machine accurate)."""
        return self.scale * float(zeta(self.exponent, m))

    def sum_sq_from(self, m: int) -> float:
        return self.scale**2 * float(zeta(2.0 * self.exponent, m))

    def functional_sums(self, u: float, m: int):
        if u == 0.0:
            return 0.0, self.sum_from(m), self.sum_sq_from(m)
        a, p = self.scale, self.exponent
        M = m + _POWER_DIRECT
        n = np.arange(m, M, dtype=float)
        lam = a * n ** (-p)
        t = 2.0 * u * lam
        w = 1.0 / (1.0 + t)
        S0 = float(np.log1p(t).sum())
        S1 = float((lam * w).sum())
        S2 = float(((lam * w) ** 2).sum())
        r0, r1, r2 = _power_em_remainder(u, a, p, M)
        return S0 + r0, S1 + r1, S2 + r2


@dataclass(frozen=True)
class StretchedExpTail:
    """lambda_n = scale * exp(-C*(pi*n)**alpha)."""

    C: float
    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if not (self.C > 0):
            raise DomainError("stretched tail C must be positive")
        if not (self.alpha > 0):
            raise DomainError("stretched tail alpha must be positive")
        if not (self.scale > 0):
            raise DomainError("stretched tail scale must be positive")

    def value(self, n):
        n = np.asarray(n, dtype=float)
        return self.scale * np.exp(-self.C * (np.pi * n) ** self.alpha)

    def count_floor(self) -> float:
        return float(self.value(COUNT_CAP))

    def inverse(self, lam: float) -> float:
        if lam >= self.scale:
            return 0.0
        if lam < self.count_floor() or lam <= 0.0:
            raise UnboundedCountError(self.count_floor())
        return (math.log(self.scale / lam) / self.C) ** (1.0 / self.alpha) / math.pi

    def sum_from(self, m: int) -> float:
        return self._sum_generic(m, lambda lam: lam)

    def sum_sq_from(self, m: int) -> float:
        return self._sum_generic(m, lambda lam: lam * lam)

    def _sum_generic(self, m: int, f) -> float:
        total = 0.0
        n0 = m
        block = 4096
        while n0 < m + _STRETCHED_CAP:
            n = np.arange(n0, n0 + block, dtype=float)
            terms = f(self.value(n))
            total += float(terms.sum())
            if terms[-1] <= 1e-18 * max(total, 1e-300):
                return total
            n0 += block
        # slow decay in n (tiny alpha): close with the integral remainder,
        # accurate because per-step variation is by then negligible
        rem = quad(
            lambda y: float(f(self.value(y))), n0 - 0.5, np.inf, epsabs=0.0, epsrel=1e-11
        )[0]
        return total + rem

    def functional_sums(self, u: float, m: int):
        if u == 0.0:
            return 0.0, self.sum_from(m), self.sum_sq_from(m)
        S0 = S1 = S2 = 0.0
        n0 = m
        block = 4096
        while n0 < m + _STRETCHED_CAP:
            lam = self.value(np.arange(n0, n0 + block, dtype=float))
            t = 2.0 * u * lam
            w = 1.0 / (1.0 + t)
            S0 += float(np.log1p(t).sum())
            S1 += float((lam * w).sum())
            S2 += float(((lam * w) ** 2).sum())
            if t[-1] <= 1e-17 * max(S0, 1e-300) and lam[-1] <= 1e-17 * max(S1, 1e-300):
                return S0, S1, S2
            n0 += block
        raise TruncationError(
            "stretched tail did not converge within "
            f"{_STRETCHED_CAP} terms (alpha={self.alpha}, C={self.C})"
        )


TailModel = PowerTail | StretchedExpTail


def _power_em_remainder(u, a, p, M):
    """sum_{n>=M} of the three functionals for a power tail.

    Midpoint Euler-Maclaurin: sum = int_{M-1/2}^inf g + g'(M-1/2)/24 + O(g''').
    The integral splits at the knee X* where 2*u*lambda = 1/2; beyond it the
    integrand is expanded geometrically, below it integrated by quadrature.
    """
    y = M - 0.5
    knee = (4.0 * u * a) ** (1.0 / p)
    X = max(y, knee)

    # geometric-series integrals from X: with q = 2*u*a*X**-p <= 1/2 the
    # terms are built recursively from ratios, never overflowing
    c = 2.0 * u * a
    q = c * X ** (-p)
    base = a * X ** (1.0 - p)  # int_X^inf a x^-p dx times (p-1)
    d0 = c * X ** (1.0 - p) / (p - 1.0)
    d1 = base / (p - 1.0)
    d2 = a * a * X ** (1.0 - 2.0 * p) / (2.0 * p - 1.0)
    I0, I1, I2 = d0, d1, d2
    for k in range(1, 200):
        r0 = -q * (k * (k * p - 1.0)) / ((k + 1.0) * ((k + 1.0) * p - 1.0))
        r1 = -q * (k * p - 1.0) / ((k + 1.0) * p - 1.0)
        d0 *= r0
        d1 *= r1
        I0 += d0
        I1 += d1
        if k >= 2:
            d2 *= -q * (k / (k - 1.0)) * (k * p - 1.0) / ((k + 1.0) * p - 1.0)
            I2 += d2
        if abs(d0) <= 1e-18 * max(abs(I0), 1e-300) and abs(d1) <= 1e-18 * max(
            abs(I1), 1e-300
        ):
            break

    if X > y:  # quadrature across [y, X], smooth and non-oscillatory
        def t_of(x):
            return c * x ** (-p)

        I0 += quad(lambda x: math.log1p(t_of(x)), y, X, epsabs=0.0, epsrel=1e-12, limit=200)[0]
        I1 += quad(
            lambda x: a * x ** (-p) / (1.0 + t_of(x)), y, X, epsabs=0.0, epsrel=1e-12, limit=200
        )[0]
        I2 += quad(
            lambda x: (a * x ** (-p) / (1.0 + t_of(x))) ** 2,
            y,
            X,
            epsabs=0.0,
            epsrel=1e-12,
            limit=200,
        )[0]

    # g'(y)/24 midpoint corrections
    ty = c * y ** (-p)
    wy = 1.0 / (1.0 + ty)
    g0p = -p * ty * wy / y
    g1p = -(p * ty) / (2.0 * u * y) * wy * wy
    g2p = -(2.0 * p) * (ty * wy) ** 2 * wy / (4.0 * u * u * y)
    return I0 + g0p / 24.0, I1 + g1p / 24.0, I2 + g2p / 24.0


def tail_count(tail: TailModel, lam: float, start: int) -> int:
    """#{n >= start : lambda_n > lam} for a tail model (strict inequality)."""
    if lam >= float(tail.value(start)):
        return 0
    y = tail.inverse(lam)
    if y > COUNT_CAP:
        raise UnboundedCountError(tail.count_floor())
    return max(0, math.ceil(y) - start)
