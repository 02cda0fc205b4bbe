"""Arbitrary-precision reals and constant engines (pi, sqrt, zeta, Hurwitz zeta).

Values are carried by :mod:`mpmath` ``mpf`` numbers.  Every engine computes at
``target + guard`` decimal digits and public results are rounded back to the
target, so callers never see internal rounding.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import factorial, isqrt

import mpmath
from mpmath import mp, mpf

from .exact import bernoulli, to_fraction

__all__ = [
    "MPReal",
    "PrecisionContext",
    "PrecisionError",
    "const_pi",
    "const_sqrt",
    "zeta",
    "hurwitz_zeta",
    "pi_mpf",
    "sqrt_mpf",
    "zeta_mpf",
    "hurwitz_mpf",
    "set_constant_cache",
    "to_mpf",
]

MIN_DIGITS = 10


class PrecisionError(ArithmeticError):
    """Requested result cannot be delivered at the available precision."""


@dataclass(frozen=True)
class PrecisionContext:
    target_digits: int
    guard_digits: int = 20

    def __post_init__(self):
        if self.target_digits < MIN_DIGITS:
            raise ValueError(f"target_digits must be >= {MIN_DIGITS}")
        if self.guard_digits < 0:
            raise ValueError("guard_digits must be >= 0")

    @property
    def working(self) -> int:
        return self.target_digits + self.guard_digits

    def scaled(self, factor: int) -> PrecisionContext:
        return PrecisionContext(self.target_digits * factor, self.guard_digits)


@dataclass(frozen=True)
class MPReal:
    """A real number known to ``precision`` significant decimal digits."""

    value: mpf
    precision: int

    def __post_init__(self):
        if self.precision < MIN_DIGITS:
            raise ValueError(f"precision must be >= {MIN_DIGITS}")

    @classmethod
    def from_mpf(cls, v, digits: int) -> MPReal:
        with mp.workdps(digits):
            return cls(+mpf(v), digits)

    def _binary(self, other, op) -> MPReal:
        if isinstance(other, MPReal):
            p = min(self.precision, other.precision)
            ov = other.value
        else:
            p = self.precision
            ov = to_mpf(other, p)
        with mp.workdps(p + 10):
            v = op(self.value, ov)
        return MPReal.from_mpf(v, p)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b)

    def __neg__(self):
        return MPReal(-self.value, self.precision)

    def __abs__(self):
        return MPReal(abs(self.value), self.precision)

    def __float__(self) -> float:
        return float(self.value)

    def close_to(self, other, guard: int = 0) -> bool:
        """Agreement to ``precision - guard`` digits, relative to max(1, |x|)."""
        o = other if isinstance(other, MPReal) else MPReal.from_mpf(to_mpf(other, self.precision), self.precision)
        p = min(self.precision, o.precision)
        with mp.workdps(p + 10):
            scale = max(mpf(1), abs(self.value))
            return abs(self.value - o.value) <= scale * mpf(10) ** (-(p - guard))

    def digits_str(self, digits: int | None = None) -> str:
        """Plain decimal rendering (``mpmath.nstr``)."""
        n = digits or self.precision
        with mp.workdps(self.precision + 5):
            return mpmath.nstr(self.value, n, strip_zeros=False)

    def __str__(self) -> str:
        """Scientific form with explicit digit count, e.g. ``1.00834927738e0@12``."""
        p = self.precision
        if self.value == 0:
            return f"0.{'0' * (p - 1)}e0@{p}"
        with mp.workdps(p + 5):
            s = mpmath.nstr(self.value, p, min_fixed=1, max_fixed=0, strip_zeros=False)
        mant, _, exp = s.partition("e")
        return f"{mant}e{int(exp or 0)}@{p}"

    @classmethod
    def parse(cls, text: str) -> MPReal:
        body, _, p = text.partition("@")
        digits = int(p) if p else max(MIN_DIGITS, len(body))
        with mp.workdps(digits + 5):
            return cls.from_mpf(mpf(body), digits)


def to_mpf(x, dps: int) -> mpf:
    with mp.workdps(dps):
        if isinstance(x, MPReal):
            return +x.value
        if isinstance(x, Fraction):
            return mpf(x.numerator) / x.denominator
        return mpf(x)


# ---------------------------------------------------------------------------
# cache

_cache_lock = threading.Lock()
_cache: dict = {}
_cache_enabled = True


def set_constant_cache(enabled: bool) -> None:
    """Toggle the process-wide constant cache (results are identical either way)."""
    global _cache_enabled
    with _cache_lock:
        _cache_enabled = enabled
        _cache.clear()


def _cached(key, compute):
    if _cache_enabled:
        with _cache_lock:
            hit = _cache.get(key)
        if hit is not None:
            return hit
    v = compute()
    if _cache_enabled:
        with _cache_lock:
            _cache[key] = v
    return v


# ---------------------------------------------------------------------------
# engines at a raw decimal precision


def _arctan_inv(n: int, scale: int) -> int:
    """floor-ish of scale * arctan(1/n) in fixed point."""
    total = term = scale // n
    n2 = n * n
    k = 1
    sign = -1
    while term:
        term //= n2
        total += sign * (term // (2 * k + 1))
        sign = -sign
        k += 1
    return total


def pi_mpf(dps: int) -> mpf:
    """pi by Machin's formula in integer fixed point."""

    def compute():
        extra = 10
        scale = 10 ** (dps + extra)
        v = 4 * (4 * _arctan_inv(5, scale) - _arctan_inv(239, scale))
        with mp.workdps(dps):
            return mpf(v) / scale

    return _cached(("pi", dps), compute)


def sqrt_mpf(n, dps: int) -> mpf:
    """sqrt of a non-negative rational; exact integer square root of a scaled
    radicand, so perfect squares come out exact."""
    q = to_fraction(n)
    if q < 0:
        raise ValueError("square root of a negative number")

    def compute():
        extra = 10
        scale = 10 ** (dps + extra)
        # sqrt(p/q) = sqrt(p*q)/q
        root = isqrt(q.numerator * q.denominator * scale * scale)
        with mp.workdps(dps):
            return mpf(root) / scale / q.denominator

    return _cached(("sqrt", q, dps), compute)


def _euler_maclaurin(s: int, a: Fraction, dps: int) -> mpf:
    """sum_{n>=0} (n + a)^(-s) with Euler-Maclaurin tail at N + a.

    Correction terms are added until the next one drops below 10^-(dps+5);
    for x^(-s) the remainder is bounded by the first omitted term.
    """
    N = max(10, dps)
    with mp.workdps(dps + 10):
        av = mpf(a.numerator) / a.denominator
        total = mpf(0)
        for n in range(N):
            total += (n + av) ** (-s)
        x = N + av
        total += x ** (1 - s) / (s - 1) + x ** (-s) / 2
        eps = mpf(10) ** (-(dps + 5))
        rising = mpf(s)  # s (s+1) ... (s+2j-2)
        xpow = x ** (-s - 1)
        inv_x2 = 1 / (x * x)
        j = 1
        while True:
            b = bernoulli(2 * j)
            term = mpf(b.numerator) / b.denominator / factorial(2 * j) * rising * xpow
            total += term
            if abs(term) < eps:
                break
            j += 1
            if 2 * j > 6 * N:
                raise PrecisionError("Euler-Maclaurin tail failed to converge")
            rising *= (s + 2 * j - 3) * (s + 2 * j - 2)
            xpow *= inv_x2
    with mp.workdps(dps):
        return +total


def zeta_mpf(s: int, dps: int) -> mpf:
    if not isinstance(s, int) or s < 2:
        raise ValueError("zeta is implemented for integers s >= 2")
    return _cached(("zeta", s, dps), lambda: _euler_maclaurin(s, Fraction(1), dps))


def hurwitz_mpf(s: int, a, dps: int) -> mpf:
    a = to_fraction(a)
    if not isinstance(s, int) or s < 2:
        raise ValueError("hurwitz_zeta is implemented for integers s >= 2")
    if not 0 < a <= 1:
        raise ValueError("hurwitz_zeta requires 0 < a <= 1")
    return _cached(("hzeta", s, a, dps), lambda: _euler_maclaurin(s, a, dps))


# ---------------------------------------------------------------------------
# public API


def _finish(v: mpf, ctx: PrecisionContext) -> MPReal:
    return MPReal.from_mpf(v, ctx.target_digits)


def const_pi(ctx: PrecisionContext) -> MPReal:
    return _finish(pi_mpf(ctx.working), ctx)


def const_sqrt(n: int, ctx: PrecisionContext) -> MPReal:
    if not isinstance(n, int) or n < 1:
        raise ValueError("const_sqrt expects a positive integer")
    return _finish(sqrt_mpf(n, ctx.working), ctx)


def zeta(s: int, ctx: PrecisionContext) -> MPReal:
    return _finish(zeta_mpf(s, ctx.working), ctx)


def hurwitz_zeta(s: int, a, ctx: PrecisionContext) -> MPReal:
    return _finish(hurwitz_mpf(s, a, ctx.working), ctx)
