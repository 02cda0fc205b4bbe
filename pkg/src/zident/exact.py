"""Exact arithmetic: rationals, univariate polynomials, rational functions,
fraction-free linear algebra, Bernoulli numbers and central binomials.

Rationals are plain :class:`fractions.Fraction` values (``BigRational`` is an
alias kept for readability at call sites).
"""
from __future__ import annotations

import threading
from fractions import Fraction
from math import comb, gcd, lcm
from typing import Callable, Iterable, Sequence, TypeVar

__all__ = [
    "BigRational",
    "Poly",
    "RatFunc",
    "to_fraction",
    "format_rational",
    "parse_rational",
    "nullspace",
    "nullspace_ratfunc",
    "bernoulli",
    "binom_central",
]

BigRational = Fraction

T = TypeVar("T")


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def format_rational(q: Fraction) -> str:
    """``"num/den"``, with the denominator omitted when it is 1."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not text:
        raise ValueError("empty rational literal")
    num, sep, den = text.partition("/")
    try:
        n = int(num)
        d = int(den) if sep else 1
    except ValueError:
        raise ValueError(f"malformed rational literal {text!r}") from None
    if d == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(n, d)


# ---------------------------------------------------------------------------
# polynomials


class Poly:
    """Dense univariate polynomial over Q, coefficients in ascending degree.

    Immutable; the zero polynomial has no coefficients.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [to_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def x(cls) -> Poly:
        return cls((0, 1))

    @classmethod
    def const(cls, c) -> Poly:
        return cls((c,))

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> Poly:
        p = cls.const(lead)
        for r in roots:
            p = p * cls((-to_fraction(r), 1))
        return p

    # -- basic properties
    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Poly.const(other).coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"Poly({self.to_str()})"

    def to_str(self, var: str = "x") -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            mag = abs(c)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{format_rational(mag)}*{mono}"
            else:
                body = format_rational(mag)
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    # -- ring operations
    @staticmethod
    def _coerce(other) -> Poly:
        if isinstance(other, Poly):
            return other
        return Poly.const(to_fraction(other))

    def __add__(self, other) -> Poly:
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        o = self._coerce(other)
        n = max(len(self.coeffs), len(o.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = o.coeffs + (Fraction(0),) * (n - len(o.coeffs))
        return Poly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self) -> Poly:
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other) -> Poly:
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> Poly:
        return self._coerce(other) - self

    def __mul__(self, other) -> Poly:
        if isinstance(other, (int, Fraction)):
            return Poly(c * other for c in self.coeffs)
        if not isinstance(other, Poly):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Poly:
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def divmod(self, other: Poly) -> tuple[Poly, Poly]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lc = other.lc
        if len(rem) <= dq:
            return Poly(), self
        quot = [Fraction(0)] * (len(rem) - dq)
        for i in range(len(rem) - 1, dq - 1, -1):
            c = rem[i]
            if c == 0:
                continue
            f = c / lc
            quot[i - dq] = f
            for j, b in enumerate(other.coeffs):
                rem[i - dq + j] -= f * b
        return Poly(quot), Poly(rem)

    def exact_div(self, other: Poly) -> Poly:
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ArithmeticError("polynomial division is not exact")
        return q

    def monic(self) -> Poly:
        if self.is_zero():
            return self
        return self * (1 / self.lc)

    def primitive(self) -> tuple[Fraction, Poly]:
        """Split into ``(content, p)`` with ``p`` integral, primitive and with
        positive leading coefficient."""
        if self.is_zero():
            return Fraction(0), self
        den = lcm(*(c.denominator for c in self.coeffs))
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for v in ints:
            g = gcd(g, v)
        if ints[-1] < 0:
            g = -g
        return Fraction(g, den), Poly(Fraction(v // g) for v in ints)

    def derivative(self) -> Poly:
        return Poly(i * c for i, c in enumerate(self.coeffs) if i)

    def shift(self, s) -> Poly:
        """p(x + s)."""
        s = to_fraction(s)
        if s == 0 or self.degree < 1:
            return self
        out = Poly()
        lin = Poly((s, 1))
        for c in reversed(self.coeffs):
            out = out * lin + c
        return out

    def compose(self, q: Poly) -> Poly:
        out = Poly()
        for c in reversed(self.coeffs):
            out = out * q + c
        return out

    def integer_roots(self) -> list[int]:
        """All integer roots, ascending."""
        if self.is_zero():
            raise ValueError("the zero polynomial has every integer as a root")
        _, p = self.primitive()
        ints = [int(c) for c in p.coeffs]
        roots = []
        low = 0
        while ints[low] == 0:
            low += 1
        if low:
            roots.append(0)
        c0 = abs(ints[low])
        cand = set()
        d = 1
        while d * d <= c0:
            if c0 % d == 0:
                cand.update((d, c0 // d))
            d += 1
        for r in sorted(cand):
            for v in (r, -r):
                if Poly(ints)(v) == 0:
                    roots.append(v)
        return sorted(roots)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd (zero only if both inputs are zero)."""
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic()


Poly.gcd = poly_gcd  # type: ignore[attr-defined]


class RatFunc:
    """Element of Q(x): reduced ``num/den`` with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = Poly._coerce(num)
        den = Poly.const(1) if den is None else Poly._coerce(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            self.num, self.den = Poly(), Poly.const(1)
            return
        g = poly_gcd(num, den)
        if g.degree > 0:
            num = num.exact_div(g)
            den = den.exact_div(g)
        lc = den.lc
        self.num = num * (1 / lc)
        self.den = den * (1 / lc)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatFunc):
            other = RatFunc(other)
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __repr__(self) -> str:
        return f"RatFunc(({self.num.to_str()})/({self.den.to_str()}))"

    @staticmethod
    def _coerce(other) -> RatFunc:
        return other if isinstance(other, RatFunc) else RatFunc(other)

    def __add__(self, other) -> RatFunc:
        o = self._coerce(other)
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self) -> RatFunc:
        return RatFunc(-self.num, self.den)

    def __sub__(self, other) -> RatFunc:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> RatFunc:
        return self._coerce(other) - self

    def __mul__(self, other) -> RatFunc:
        o = self._coerce(other)
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> RatFunc:
        o = self._coerce(other)
        if o.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other) -> RatFunc:
        return self._coerce(other) / self

    def shift(self, s) -> RatFunc:
        return RatFunc(self.num.shift(s), self.den.shift(s))

    def __call__(self, x):
        return self.num(x) / self.den(x)


# ---------------------------------------------------------------------------
# linear algebra


def _bareiss(
    rows: list[list[T]],
    ncols: int,
    is_zero: Callable[[T], bool],
    exact_div: Callable[[T, T], T],
    one: T,
) -> list[int]:
    """In-place fraction-free row echelon form; returns pivot columns.

    Pivot is the first nonzero entry at or below the current row.
    """
    r = 0
    prev = one
    pivots = []
    nrows = len(rows)
    for c in range(ncols):
        p = next((i for i in range(r, nrows) if not is_zero(rows[i][c])), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        for i in range(r + 1, nrows):
            a = rows[i][c]
            for j in range(c + 1, ncols):
                rows[i][j] = exact_div(piv * rows[i][j] - a * rows[r][j], prev)
            rows[i][c] = rows[i][c] - rows[i][c]
        # rows below r keep the invariant for columns <= c: they are zero there
        prev = piv
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return pivots


def _back_substitute(rows, pivots, ncols, field_zero, field_one, ring_to_field):
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [field_zero] * ncols
        v[f] = field_one
        for i in range(len(pivots) - 1, -1, -1):
            pc = pivots[i]
            acc = field_zero
            for j in range(pc + 1, ncols):
                if v[j] != field_zero:
                    acc = acc + ring_to_field(rows[i][j]) * v[j]
            v[pc] = -acc / ring_to_field(rows[i][pc])
        basis.append(v)
    return basis


def nullspace(m: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of the right nullspace of a rational matrix.

    Rows are scaled to integers and reduced by fraction-free elimination;
    the basis has one vector per non-pivot column.  ``ncols`` is only needed
    for a matrix with no rows.
    """
    if ncols is None:
        if not m:
            raise ValueError("ncols is required for a matrix with no rows")
        ncols = len(m[0])
    rows = []
    for row in m:
        if len(row) != ncols:
            raise ValueError("matrix is not rectangular")
        fr = [to_fraction(v) for v in row]
        den = lcm(*(v.denominator for v in fr)) if fr else 1
        rows.append([int(v * den) for v in fr])
    pivots = _bareiss(rows, ncols, lambda v: v == 0, lambda a, b: a // b, 1)
    return _back_substitute(rows, pivots, ncols, Fraction(0), Fraction(1), Fraction)


def nullspace_ratfunc(m: Sequence[Sequence[RatFunc]], ncols: int | None = None) -> list[list[RatFunc]]:
    """Right nullspace over Q(x); denominators are cleared row-wise and the
    elimination runs over Q[x] with exact polynomial division."""
    if ncols is None:
        if not m:
            raise ValueError("ncols is required for a matrix with no rows")
        ncols = len(m[0])
    rows = []
    for row in m:
        if len(row) != ncols:
            raise ValueError("matrix is not rectangular")
        row = [RatFunc._coerce(v) for v in row]
        den = Poly.const(1)
        for v in row:
            den = den * v.den.exact_div(poly_gcd(den, v.den))
        rows.append([v.num * den.exact_div(v.den) for v in row])
    pivots = _bareiss(rows, ncols, Poly.is_zero, Poly.exact_div, Poly.const(1))
    zero, one = RatFunc(0), RatFunc(1)
    return _back_substitute(rows, pivots, ncols, zero, one, RatFunc)


# ---------------------------------------------------------------------------
# Bernoulli numbers and central binomials

_bern_lock = threading.Lock()
_bern: list[Fraction] = [Fraction(1)]


def bernoulli(n: int) -> Fraction:
    """B_n with B_1 = -1/2; memoized, safe under concurrent callers."""
    if n < 0:
        raise ValueError("Bernoulli index must be >= 0")
    if n < len(_bern):
        return _bern[n]
    with _bern_lock:
        while len(_bern) <= n:
            m = len(_bern)
            if m > 1 and m % 2 == 1:
                _bern.append(Fraction(0))
                continue
            s = sum((comb(m + 1, j) * _bern[j] for j in range(m) if _bern[j]), Fraction(0))
            _bern.append(-s / (m + 1))
    return _bern[n]


def binom_central(k: int) -> int:
    """C(2k, k) by the exact multiplicative update."""
    if k < 0:
        raise ValueError("k must be >= 0")
    c = 1
    for j in range(k):
        c = c * 2 * (2 * j + 1) // (j + 1)
    return c
