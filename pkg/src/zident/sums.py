"""Central-binomial series sum_{k>=1} (sum_j a_j H_k^(h_j) / k^(c_j)) / C(2k, k).

Evaluation uses exact rational partial sums for the first terms, then mpf
terms, plus a certified geometric tail bound.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from mpmath import mp, mpf

from .exact import format_rational, to_fraction
from .mpfloat import MPReal, PrecisionContext, PrecisionError

__all__ = [
    "SeriesTerm",
    "SeriesSpec",
    "EvalResult",
    "term_exact",
    "iter_terms_exact",
    "eval_series",
    "tail_bound",
    "term_source",
]

MAX_WEIGHT = 9
EXACT_TERMS = 80
DEFAULT_TERMS_MAX = 10**6


@dataclass(frozen=True)
class SeriesTerm:
    coeff: Fraction
    h: int  # harmonic order, 0 = no harmonic factor
    kpow: int

    def __post_init__(self):
        object.__setattr__(self, "coeff", to_fraction(self.coeff))
        if self.h < 0 or self.kpow < 0:
            raise ValueError("harmonic order and k-power must be non-negative")
        if self.h == 1:
            raise ValueError("harmonic order 1 is not supported (tail bound needs H_k^(a) <= zeta(2))")
        if self.h == 0 and self.kpow < 2:
            raise ValueError("a term without harmonic factor needs k-power >= 2")
        if self.h + self.kpow > MAX_WEIGHT:
            raise ValueError(f"term weight {self.h + self.kpow} exceeds {MAX_WEIGHT}")


@dataclass(frozen=True)
class SeriesSpec:
    terms: tuple[SeriesTerm, ...]

    def __post_init__(self):
        terms = tuple(t if isinstance(t, SeriesTerm) else SeriesTerm(*t) for t in self.terms)
        if not terms:
            raise ValueError("a series needs at least one term")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def of(cls, *terms) -> SeriesSpec:
        """``SeriesSpec.of((33, 5, 2), (4, 0, 7))``."""
        return cls(tuple(SeriesTerm(to_fraction(c), h, p) for c, h, p in terms))

    @property
    def harmonic_orders(self) -> list[int]:
        return sorted({t.h for t in self.terms if t.h})

    def with_coeff(self, index: int, coeff: Fraction) -> SeriesSpec:
        ts = list(self.terms)
        t = ts[index]
        ts[index] = SeriesTerm(coeff, t.h, t.kpow)
        return SeriesSpec(tuple(ts))

    def to_json(self) -> dict:
        return {"terms": [{"coeff": format_rational(t.coeff), "h": t.h, "kpow": t.kpow} for t in self.terms]}

    @classmethod
    def from_json(cls, data: dict) -> SeriesSpec:
        try:
            raw = data["terms"]
        except (KeyError, TypeError):
            raise ValueError("series JSON needs a 'terms' list") from None
        return cls(tuple(SeriesTerm(to_fraction(str(t["coeff"])), int(t.get("h", 0)), int(t["kpow"])) for t in raw))


@dataclass(frozen=True)
class EvalResult:
    value: MPReal
    terms_used: int
    tail_bound: MPReal


def iter_terms_exact(spec: SeriesSpec) -> Iterator[Fraction]:
    """Exact summands for k = 1, 2, ..."""
    orders = spec.harmonic_orders
    H = {a: Fraction(0) for a in orders}
    c = 1
    k = 0
    while True:
        k += 1
        c = c * 2 * (2 * k - 1) // k
        for a in orders:
            H[a] += Fraction(1, k**a)
        num = Fraction(0)
        for t in spec.terms:
            num += t.coeff * (H[t.h] if t.h else 1) / k**t.kpow
        yield num / c


def term_exact(spec: SeriesSpec, k: int) -> Fraction:
    if k < 1:
        raise ValueError("summation index starts at k = 1")
    it = iter_terms_exact(spec)
    for _ in range(k - 1):
        next(it)
    return next(it)


def _tail_mpf(spec: SeriesSpec, k0: int) -> mpf:
    # C(2k,k) >= 4^k / (2 sqrt k), H_k^(a) < 2 for a >= 2; consecutive bound
    # terms shrink by at least 1/2, so the tail is at most twice the first.
    M = sum(abs(t.coeff) * (2 if t.h else 1) for t in spec.terms)
    c_min = min(t.kpow for t in spec.terms)
    k = k0 + 1
    with mp.workdps(30):
        first = 2 * mp.sqrt(k) * mpf(4) ** (-k) / mpf(k) ** c_min
        return 2 * (mpf(M.numerator) / M.denominator) * first


def tail_bound(spec: SeriesSpec, k0: int) -> MPReal:
    """Certified bound on |sum_{k > k0} term_k|."""
    if k0 < 1:
        raise ValueError("k0 must be >= 1")
    return MPReal.from_mpf(_tail_mpf(spec, k0), 30)


def eval_series(spec: SeriesSpec, ctx: PrecisionContext, terms_max: int = DEFAULT_TERMS_MAX) -> EvalResult:
    dps = ctx.working
    with mp.workdps(30):
        eps = mpf(10) ** (-dps)
    k0 = 64
    while _tail_mpf(spec, k0) >= eps:
        k0 *= 2
        if k0 > terms_max:
            raise PrecisionError(f"series would need more than {terms_max} terms")

    terms = iter_terms_exact(spec)
    n_exact = min(k0, EXACT_TERMS)
    exact_sum = sum((next(terms) for _ in range(n_exact)), Fraction(0))

    orders = spec.harmonic_orders
    with mp.workdps(dps + 10):
        total = mpf(exact_sum.numerator) / exact_sum.denominator
        if k0 > n_exact:
            H = {}
            for a in orders:
                h = Fraction(0)
                for i in range(1, n_exact + 1):
                    h += Fraction(1, i**a)
                H[a] = mpf(h.numerator) / h.denominator
            c = 1
            for j in range(n_exact):
                c = c * 2 * (2 * j + 1) // (j + 1)
            coeffs = [(mpf(t.coeff.numerator) / t.coeff.denominator, t.h, t.kpow) for t in spec.terms]
            for k in range(n_exact + 1, k0 + 1):
                c = c * 2 * (2 * k - 1) // k
                kk = mpf(k)
                for a in orders:
                    H[a] += kk ** (-a)
                num = mpf(0)
                for coef, h, p in coeffs:
                    num += coef * (H[h] if h else 1) / kk**p
                total += num / c
        rounding = (k0 - n_exact) * (abs(total) + 1) * mpf(10) ** (-(dps + 10))
        bound = _tail_mpf(spec, k0) + rounding
    return EvalResult(
        value=MPReal.from_mpf(total, ctx.target_digits),
        terms_used=k0,
        tail_bound=MPReal.from_mpf(bound, 30),
    )


def term_source(spec: SeriesSpec, shift: int = 0):
    """k -> exact summand at index k + shift, 0 below the first index.

    Used as the coefficient sequence of the generating function
    sum_k term_(k+shift) x^k.
    """
    cache: list[Fraction] = []
    it = iter_terms_exact(spec)

    def f(k: int) -> Fraction:
        idx = k + shift
        if idx < 1:
            return Fraction(0)
        while len(cache) < idx:
            cache.append(next(it))
        return cache[idx - 1]

    return f
