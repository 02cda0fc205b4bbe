"""Iterated integrals: words, the shuffle product, G-words over
{1/t, sqrt(t) sqrt(4 - t)} evaluated at 1, and cyclotomic harmonic
polylogarithms at cyclotomy 3 over {1/y, 1/(y-1), 1/(y^2+y+1), y/(y^2+y+1)}.

A word (f1, ..., fk) denotes int_0^x f1(t) G(f2, ..., fk; t) dt.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from mpmath import mp, mpf

from .constexpr import ConstExpr, Neg, Pi, Pow, Rat, Sqrt, Zeta, BinOp
from .exact import format_rational, to_fraction
from .mpfloat import MPReal, PrecisionContext, sqrt_mpf

__all__ = [
    "Letter",
    "Word",
    "WordSum",
    "QSqrt3",
    "DivergentWordError",
    "parse_word",
    "format_word",
    "shuffle",
    "gl_eval",
    "gl_eval_detail",
    "gl_combo_eval",
    "chpl_closed_form",
    "chpl_eval_series",
    "convergent_at_one",
    "load_gl_combo",
    "chpl_product_expr",
    "load_reduced_form",
]


class Letter(Enum):
    G0 = "0"  # 1/t
    GA = "a"  # sqrt(t) sqrt(4 - t)
    C0 = "c0"  # 1/y
    C1 = "c1"  # 1/(y - 1)
    CL = "l"  # 1/(y^2 + y + 1)
    CM = "m"  # y/(y^2 + y + 1)

    @property
    def alphabet(self) -> str:
        return "g" if self in (Letter.G0, Letter.GA) else "c"

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self]


_SYMBOLS = {Letter.G0: "0", Letter.GA: "a", Letter.C0: "0", Letter.C1: "1", Letter.CL: "l", Letter.CM: "m"}
_PARSE = {
    "g": {"0": Letter.G0, "a": Letter.GA},
    "c": {"0": Letter.C0, "1": Letter.C1, "l": Letter.CL, "m": Letter.CM, "λ": Letter.CL, "μ": Letter.CM},
}

Word = tuple  # tuple[Letter, ...]


class DivergentWordError(ValueError):
    pass


def parse_word(text: str | Sequence[str], alphabet: str) -> Word:
    """``"a,a,0,a"`` (alphabet ``g``) or ``"0,0,1"`` / ``"l"`` (alphabet ``c``)."""
    table = _PARSE.get(alphabet)
    if table is None:
        raise ValueError(f"unknown alphabet {alphabet!r}; use 'g' or 'c'")
    items = text if not isinstance(text, str) else [p.strip() for p in text.split(",")] if text.strip() else []
    try:
        return tuple(table[str(p).strip()] for p in items)
    except KeyError as err:
        raise ValueError(f"unknown letter {err.args[0]!r} for alphabet {alphabet!r}") from None


def format_word(w: Word) -> str:
    return ",".join(letter.symbol for letter in w)


def _alphabet_of(w: Word) -> str | None:
    kinds = {letter.alphabet for letter in w}
    if len(kinds) > 1:
        raise ValueError("G-letters and C-letters cannot mix in one word")
    return kinds.pop() if kinds else None


class WordSum:
    """Q-linear combination of words (zero coefficients are dropped)."""

    def __init__(self, terms: dict | Iterable = ()):
        items = terms.items() if isinstance(terms, dict) else terms
        acc: dict = {}
        for w, c in items:
            acc[tuple(w)] = acc.get(tuple(w), Fraction(0)) + to_fraction(c)
        self.terms: dict[Word, Fraction] = {w: c for w, c in acc.items() if c}

    def __add__(self, other: WordSum) -> WordSum:
        return WordSum(list(self.terms.items()) + list(other.terms.items()))

    def __eq__(self, other) -> bool:
        return isinstance(other, WordSum) and self.terms == other.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(sorted(self.terms.items(), key=lambda kv: [letter.value for letter in kv[0]]))

    def total_multiplicity(self) -> Fraction:
        return sum(self.terms.values(), Fraction(0))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w, c in self:
            body = f"({format_word(w)})"
            parts.append(body if c == 1 else f"{format_rational(c)}*{body}")
        return " + ".join(parts)

    def to_json(self) -> list[dict]:
        return [{"coeff": format_rational(c), "sqrt3": "0", "word": [letter.symbol for letter in w]} for w, c in self]


def _shuffle_counts(u: Word, v: Word) -> Counter:
    @lru_cache(maxsize=None)
    def rec(i: int, j: int) -> tuple:
        if i == len(u):
            return ((v[j:], 1),)
        if j == len(v):
            return ((u[i:], 1),)
        out: Counter = Counter()
        for w, c in rec(i + 1, j):
            out[(u[i],) + w] += c
        for w, c in rec(i, j + 1):
            out[(v[j],) + w] += c
        return tuple(out.items())

    return Counter(dict(rec(0, 0)))


def shuffle(u: Word, v: Word) -> WordSum:
    """Sum over all interleavings of u and v preserving their internal orders."""
    a, b = _alphabet_of(u), _alphabet_of(v)
    if a and b and a != b:
        raise ValueError("cannot shuffle words from different alphabets")
    return WordSum(_shuffle_counts(tuple(u), tuple(v)))


# ---------------------------------------------------------------------------
# G-words at 1 via t = s^2


def _check_gl_word(w: Word) -> None:
    if not w:
        return
    if any(letter.alphabet != "g" for letter in w):
        raise ValueError("gl_eval expects a word over the letters 0 and a")
    if w[-1] is Letter.G0:
        raise DivergentWordError(
            f"word ({format_word(w)}) diverges at t=0: a trailing 1/t letter integrates log t from 0"
        )


def _gl_terms(ctx: PrecisionContext) -> int:
    # coefficients decay like 2^-n (singularity of sqrt(4 - s^2) at s = 2)
    return max(int(ctx.working * math.log2(10)) + 60, 4 * ctx.target_digits)


@lru_cache(maxsize=64)
def _sqrt_series(n_terms: int, dps: int) -> tuple:
    """2 s^2 sqrt(4 - s^2) as coefficients in s, up to degree n_terms."""
    with mp.workdps(dps):
        out = [mpf(0)] * (n_terms + 1)
        b = mpf(1)
        quarter = mpf(-1) / 4
        half = mpf(1) / 2
        for m in range(n_terms // 2 + 1):
            if 2 * m + 2 <= n_terms:
                out[2 * m + 2] = 4 * b * quarter**m
            b = b * (half - m) / (m + 1)
        return tuple(out)


class _GLSeries:
    """Memoized s-series of inner G-words, shared across one evaluation batch."""

    def __init__(self, dps: int, n_terms: int):
        self.dps = dps
        self.n = n_terms
        self.memo: dict[Word, list] = {(): [mpf(1)] + [mpf(0)] * n_terms}

    def series(self, w: Word) -> list:
        hit = self.memo.get(w)
        if hit is not None:
            return hit
        inner = self.series(w[1:])
        n = self.n
        with mp.workdps(self.dps):
            if w[0] is Letter.GA:
                kern = _sqrt_series(n, self.dps)
                prod = [mpf(0)] * (n + 1)
                nz = [(i, c) for i, c in enumerate(inner) if c]
                for j in range(2, n + 1, 2):
                    kj = kern[j]
                    for i, c in nz:
                        if i + j > n:
                            break
                        prod[i + j] += kj * c
                # integrate: s^m -> s^(m+1)/(m+1)
                out = [mpf(0)] + [prod[m - 1] / m for m in range(1, n + 1)]
            else:
                if inner[0] != 0:
                    raise DivergentWordError("1/t letter applied to a function not vanishing at 0")
                # dt/t = 2 ds/s
                out = [mpf(0)] + [2 * inner[m] / m for m in range(1, n + 1)]
        self.memo[w] = out
        return out

    def value(self, w: Word) -> tuple[mpf, mpf]:
        s = self.series(w)
        with mp.workdps(self.dps):
            total = mp.fsum(s)
            tail = 4 * max(abs(c) for c in s[-8:])
        return total, tail


def gl_eval_detail(w: Word, ctx: PrecisionContext, n_terms: int | None = None) -> tuple[MPReal, mpf]:
    """(value of G(w; 1), estimated truncation error of the s-series)."""
    w = tuple(w)
    _check_gl_word(w)
    n = n_terms or _gl_terms(ctx)
    value, tail = _GLSeries(ctx.working + 10, n).value(w)
    return MPReal.from_mpf(value, ctx.target_digits), tail


def gl_eval(w: Word, ctx: PrecisionContext) -> MPReal:
    return gl_eval_detail(w, ctx)[0]


@dataclass(frozen=True)
class QSqrt3:
    """p + q*sqrt(3) with rational p, q."""

    p: Fraction = Fraction(0)
    q: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "p", to_fraction(self.p))
        object.__setattr__(self, "q", to_fraction(self.q))

    def to_mpf(self, dps: int) -> mpf:
        with mp.workdps(dps):
            return mpf(self.p.numerator) / self.p.denominator + mpf(self.q.numerator) / self.q.denominator * sqrt_mpf(3, dps)


def gl_combo_eval(
    combo: Sequence[tuple[QSqrt3 | Fraction, Word]],
    constant,
    ctx: PrecisionContext,
) -> MPReal:
    """sum coeff * G(word; 1) + constant, sharing inner series between words."""
    dps = ctx.working + 10
    words = [tuple(w) for _, w in combo]
    for w in words:
        _check_gl_word(w)
    engine = _GLSeries(dps, _gl_terms(ctx))
    with mp.workdps(dps):
        c = to_fraction(constant)
        total = mpf(c.numerator) / c.denominator
        for coeff, w in combo:
            if not isinstance(coeff, QSqrt3):
                coeff = QSqrt3(to_fraction(coeff))
            total += coeff.to_mpf(dps) * engine.value(tuple(w))[0]
    return MPReal.from_mpf(total, ctx.target_digits)


# ---------------------------------------------------------------------------
# cyclotomic harmonic polylogarithms


def _check_c_word(w: Word) -> None:
    if any(letter.alphabet != "c" for letter in w):
        raise ValueError("expected a word over the cyclotomic letters 0, 1, l, m")


def convergent_at_one(w: Word) -> bool:
    """H(w; x) has a finite limit as x -> 1 unless the leading integrand is 1/(y-1)."""
    w = tuple(w)
    _check_c_word(w)
    return not w or w[0] is not Letter.C1


def _h_lambda() -> ConstExpr:
    # pi / (3 sqrt 3)
    return BinOp("/", Pi(), BinOp("*", Rat(Fraction(3)), Sqrt(3)))


def chpl_closed_form(w: Word) -> ConstExpr | None:
    """Known values at 1: H(0^(n-1),1) = -zeta(n), H(l^n) = H(l)^n/n!, H(0^k) = 0."""
    w = tuple(w)
    _check_c_word(w)
    if not w:
        return Rat(Fraction(1))
    if all(letter is Letter.C0 for letter in w):
        return Rat(Fraction(0))
    n = len(w)
    if n >= 2 and w[-1] is Letter.C1 and all(letter is Letter.C0 for letter in w[:-1]):
        return Neg(Zeta(n))
    if all(letter is Letter.CL for letter in w):
        base = _h_lambda() if n == 1 else Pow(_h_lambda(), n)
        return base if n == 1 else BinOp("/", base, Rat(Fraction(math.factorial(n))))
    return None


def _chpl_terms(x: Fraction, dps: int, weight: int) -> int:
    ratio = math.log10(1 / float(x))
    return int((dps + 5) / ratio) + 10 * weight + 20


def chpl_eval_series(w: Word, x, ctx: PrecisionContext) -> MPReal:
    """H(w; x) for 0 < x <= 1/2 by termwise integration of power series at 0."""
    w = tuple(w)
    _check_c_word(w)
    x = to_fraction(x)
    if not 0 < x <= Fraction(1, 2):
        raise ValueError("chpl_eval_series needs 0 < x <= 1/2")
    dps = ctx.working + 10
    with mp.workdps(dps):
        xv = mpf(x.numerator) / x.denominator
        if w and all(letter is Letter.C0 for letter in w):
            v = mp.log(xv) ** len(w) / math.factorial(len(w))
            return MPReal.from_mpf(v, ctx.target_digits)
        if w and w[-1] is Letter.C0:
            raise DivergentWordError("trailing 0 letter needs log regularisation; not supported")
        n = _chpl_terms(x, dps, len(w))
        g = [mpf(1)] + [mpf(0)] * n
        for letter in reversed(w):
            g = _apply_letter(letter, g, n)
        total = mpf(0)
        p = mpf(1)
        for c in g:
            total += c * p
            p *= xv
    return MPReal.from_mpf(total, ctx.target_digits)


def _apply_letter(letter: Letter, g: list, n: int) -> list:
    """Coefficients of int_0^y f_letter(t) g(t) dt."""
    if letter is Letter.C0:
        if g[0] != 0:
            raise DivergentWordError("1/y letter applied to a function not vanishing at 0")
        return [mpf(0)] + [g[m] / m for m in range(1, n + 1)]
    if letter is Letter.C1:
        # 1/(y-1) = -1/(1-y): negated running sums
        h = []
        run = mpf(0)
        for c in g:
            run += c
            h.append(-run)
    else:
        # 1/(1+y+y^2) = (1-y)/(1-y^3)
        u = [g[0]] + [g[m] - g[m - 1] for m in range(1, n + 1)]
        h = list(u)
        for m in range(3, n + 1):
            h[m] += h[m - 3]
        if letter is Letter.CM:
            h = [mpf(0)] + h[:-1]
    return [mpf(0)] + [h[m - 1] / m for m in range(1, n + 1)]


def load_gl_combo(data: dict) -> tuple[list[tuple[QSqrt3, Word]], Fraction]:
    """Read ``{"terms": [{"coeff", "sqrt3", "word"}], "constant"}``."""
    terms = []
    for t in data["terms"]:
        coeff = QSqrt3(to_fraction(str(t.get("coeff", "0"))), to_fraction(str(t.get("sqrt3", "0"))))
        terms.append((coeff, parse_word(t["word"], data.get("alphabet", "g"))))
    return terms, to_fraction(str(data.get("constant", "0")))


def chpl_product_expr(terms: Iterable[tuple[Fraction, Sequence[tuple[Word, int]]]]) -> ConstExpr:
    """sum coeff * prod H(word; 1)^power with every H replaced by its closed form."""
    out = None
    for coeff, factors in terms:
        coeff = to_fraction(coeff)
        e: ConstExpr = Rat(abs(coeff))
        for w, power in factors:
            closed = chpl_closed_form(w)
            if closed is None:
                raise ValueError(f"no closed form known for H({format_word(w)}; 1)")
            e = BinOp("*", e, closed if power == 1 else Pow(closed, power))
        if out is None:
            out = Neg(e) if coeff < 0 else e
        else:
            out = BinOp("-" if coeff < 0 else "+", out, e)
    return out if out is not None else Rat(Fraction(0))


def load_reduced_form(data: dict) -> list[tuple[Fraction, list[tuple[Word, int]]]]:
    return [
        (to_fraction(str(t["coeff"])), [(parse_word(f["word"], "c"), int(f.get("power", 1))) for f in t["factors"]])
        for t in data["terms"]
    ]
