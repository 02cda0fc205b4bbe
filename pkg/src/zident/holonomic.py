"""P-finite recurrences, holonomic differential operators, closure properties
and the recurrence -> ODE translation for generating functions.

A :class:`Recurrence` ``sum_j p_j(k) f(k+j) = 0`` is asserted for all
``k >= offset``.  A :class:`DiffOp` ``sum_j q_j(x) f^(j)(x) = 0``.  A term
source is any callable ``k -> Fraction`` (deterministic, side-effect free).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from functools import lru_cache
from itertools import product
from typing import Callable, Sequence

from .exact import Poly, RatFunc, format_rational, nullspace_ratfunc, parse_rational, poly_gcd

__all__ = [
    "Recurrence",
    "DiffOp",
    "TermSource",
    "RecCheck",
    "OdeCheck",
    "ClosureError",
    "rec_check",
    "closure_add",
    "closure_mul",
    "rec_for_harmonic",
    "rec_hypergeometric",
    "rec_to_ode",
    "ode_annihilates",
    "find_index_shift",
    "harmonic_source",
    "cached_source",
]

TermSource = Callable[[int], Fraction]


class ClosureError(RuntimeError):
    """Internal linear solve was inconsistent (an implementation bug)."""


def _poly_from_json(cs) -> Poly:
    return Poly(parse_rational(str(c)) for c in cs)


def _poly_to_json(p: Poly) -> list[str]:
    return [format_rational(c) for c in p.coeffs]


def _content_free(polys: Sequence[Poly]) -> tuple[list[Poly], Poly]:
    """Divide out the common polynomial factor and rational content."""
    g = Poly()
    for p in polys:
        g = poly_gcd(g, p) if not g.is_zero() else p.monic()
    if g.degree > 0:
        polys = [p.exact_div(g) for p in polys]
    else:
        g = Poly.const(1)
    # rational content: make all coefficients coprime integers, leading positive
    lead = next(p for p in reversed(polys) if not p.is_zero())
    contents = [p.primitive()[0] for p in polys if not p.is_zero()]
    num = 0
    den = 1
    for c in contents:
        num = gcd(num, c.numerator)
        den = lcm(den, c.denominator)
    scale = Fraction(den, num)
    if lead.lc < 0:
        scale = -scale
    return [p * scale for p in polys], g


@dataclass(frozen=True)
class Recurrence:
    coeffs: tuple[Poly, ...]
    offset: int = 0

    def __post_init__(self):
        cs = tuple(c if isinstance(c, Poly) else Poly(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", cs)
        if not cs or cs[-1].is_zero():
            raise ValueError("leading recurrence coefficient must be nonzero")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def max_degree(self) -> int:
        return max(c.degree for c in self.coeffs)

    def residual(self, f: TermSource, k: int) -> Fraction:
        return sum((p(k) * f(k + j) for j, p in enumerate(self.coeffs) if not p.is_zero()), Fraction(0))

    def shift(self, s: int) -> Recurrence:
        """Recurrence for g(k) = f(k - s): coefficients p_j(k - s), offset + s."""
        return Recurrence(tuple(p.shift(-s) for p in self.coeffs), self.offset + s)

    def normalized(self) -> Recurrence:
        cs, _ = _content_free(list(self.coeffs))
        return Recurrence(tuple(cs), self.offset)

    def to_json(self) -> dict:
        return {
            "format": "zident/1",
            "order": self.order,
            "var": "n",
            "offset": self.offset,
            "coeffs": [_poly_to_json(p) for p in self.coeffs],
        }

    @classmethod
    def from_json(cls, data: dict) -> Recurrence:
        if data.get("var", "n") != "n":
            raise ValueError("recurrence JSON must use var 'n'")
        coeffs = tuple(_poly_from_json(c) for c in data["coeffs"])
        if "order" in data and data["order"] != len(coeffs) - 1:
            raise ValueError("order does not match the number of coefficients")
        return cls(coeffs, int(data.get("offset", 0)))

    def __str__(self) -> str:
        terms = [f"({p.to_str('k')})*f(k+{j})" for j, p in enumerate(self.coeffs) if not p.is_zero()]
        return " + ".join(terms) + f" = 0  (k >= {self.offset})"


@dataclass(frozen=True)
class DiffOp:
    coeffs: tuple[Poly, ...]

    def __post_init__(self):
        cs = tuple(c if isinstance(c, Poly) else Poly(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", cs)
        if not cs or cs[-1].is_zero():
            raise ValueError("leading operator coefficient must be nonzero")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def max_degree(self) -> int:
        return max(c.degree for c in self.coeffs)

    def compose(self, other: DiffOp) -> DiffOp:
        """self o other."""
        out: dict[int, Poly] = {}
        for k, q in enumerate(self.coeffs):
            if q.is_zero():
                continue
            for j, r in enumerate(other.coeffs):
                # D^k (r D^j) = sum_i C(k, i) r^(i) D^(k - i + j)
                deriv = r
                binom = 1
                for i in range(k + 1):
                    if deriv.is_zero():
                        break
                    idx = k - i + j
                    out[idx] = out.get(idx, Poly()) + q * deriv * binom
                    deriv = deriv.derivative()
                    binom = binom * (k - i) // (i + 1)
        top = max(i for i, p in out.items() if not p.is_zero())
        return DiffOp(tuple(out.get(i, Poly()) for i in range(top + 1)))

    def normalized(self) -> DiffOp:
        cs, _ = _content_free(list(self.coeffs))
        return DiffOp(tuple(cs))

    def to_json(self) -> dict:
        return {
            "format": "zident/1",
            "order": self.order,
            "var": "x",
            "coeffs": [_poly_to_json(p) for p in self.coeffs],
        }

    @classmethod
    def from_json(cls, data: dict) -> DiffOp:
        if data.get("var", "x") != "x":
            raise ValueError("differential operator JSON must use var 'x'")
        coeffs = tuple(_poly_from_json(c) for c in data["coeffs"])
        if "order" in data and data["order"] != len(coeffs) - 1:
            raise ValueError("order does not match the number of coefficients")
        return cls(coeffs)

    def __str__(self) -> str:
        terms = [f"({p.to_str('x')})*f^({j})(x)" for j, p in enumerate(self.coeffs) if not p.is_zero()]
        return " + ".join(terms) + " = 0"


# ---------------------------------------------------------------------------
# term sources


def cached_source(f: TermSource) -> TermSource:
    return lru_cache(maxsize=None)(f)


def harmonic_source(a: int) -> TermSource:
    """k -> H_k^(a), with H_0 = 0."""

    @lru_cache(maxsize=None)
    def h(k: int) -> Fraction:
        if k <= 0:
            return Fraction(0)
        return h(k - 1) + Fraction(1, k**a)

    def safe(k: int) -> Fraction:
        # warm the cache upward so deep indices don't recurse deeply
        for i in range(0, k, 200):
            h(i)
        return h(k)

    return safe


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class RecCheck:
    holds: bool
    first_failure: int | None
    checked: range


def rec_check(rec: Recurrence, f: TermSource, k_max: int) -> RecCheck:
    """Evaluate the recurrence exactly for offset <= k <= k_max - order."""
    if k_max < rec.offset + rec.order:
        raise ValueError("k_max must be at least offset + order")
    ks = range(rec.offset, k_max - rec.order + 1)
    for k in ks:
        if rec.residual(f, k) != 0:
            return RecCheck(False, k, ks)
    return RecCheck(True, None, ks)


def find_index_shift(rec: Recurrence, f: TermSource, k_max: int, shifts: Sequence[int] = range(-3, 4)) -> int | None:
    """Smallest |s| such that rec holds for k -> f(k + s)."""
    for s in sorted(shifts, key=lambda v: (abs(v), v)):
        try:
            ok = rec_check(rec, lambda k: f(k + s), k_max).holds
        except ZeroDivisionError:
            continue
        if ok:
            return s
    return None


@dataclass(frozen=True)
class OdeCheck:
    residuals: tuple[Fraction, ...]

    @property
    def annihilates(self) -> bool:
        return all(r == 0 for r in self.residuals)

    @property
    def first_nonzero(self) -> int | None:
        return next((i for i, r in enumerate(self.residuals) if r != 0), None)


def ode_annihilates(op: DiffOp, f: TermSource, n_max: int) -> OdeCheck:
    """Apply op to sum_{k<=n_max} f_k x^k exactly; residuals of x^0..x^(n_max-d-degmax)."""
    d, e = op.order, op.max_degree
    if n_max <= d + e:
        raise ValueError("n_max must exceed order + max coefficient degree")
    s = [Fraction(f(k)) for k in range(n_max + 1)]
    top = n_max - d - e
    res = [Fraction(0)] * (top + 1)
    for j, q in enumerate(op.coeffs):
        if q.is_zero():
            continue
        # coefficient m of D^j S is s[m+j] * (m+1)...(m+j)
        dj = []
        for m in range(top + 1):
            if m + j > n_max:
                dj.append(Fraction(0))
                continue
            fall = 1
            for t in range(1, j + 1):
                fall *= m + t
            dj.append(s[m + j] * fall)
        for i, c in enumerate(q.coeffs):
            if c == 0:
                continue
            for m in range(i, top + 1):
                res[m] += c * dj[m - i]
    return OdeCheck(tuple(res))


# ---------------------------------------------------------------------------
# standard recurrences


def rec_for_harmonic(a: int) -> Recurrence:
    """(k+2)^a (f(k+2) - f(k+1)) - (k+1)^a (f(k+1) - f(k)) = 0."""
    if a < 1:
        raise ValueError("harmonic order must be >= 1")
    p1 = Poly((1, 1)) ** a
    p2 = Poly((2, 1)) ** a
    return Recurrence((p1, -(p1 + p2), p2), 0)


def rec_hypergeometric(num: Poly, den: Poly, offset: int = 0) -> Recurrence:
    """Order-1 recurrence for f(k+1)/f(k) = num(k)/den(k): den f(k+1) - num f(k) = 0."""
    return Recurrence((-num, den), offset)


# ---------------------------------------------------------------------------
# closure


def _reduction_images(rec: Recurrence, count: int) -> list[list[RatFunc]]:
    """Coordinates of S^i f (i < count) in the basis f(k), ..., f(k+d-1) over Q(k)."""
    d = rec.order
    lead = RatFunc(rec.coeffs[-1])
    reduce_row = [-RatFunc(p) / lead for p in rec.coeffs[:-1]]
    images = []
    v = [RatFunc(1 if j == 0 else 0) for j in range(d)]
    for _ in range(count):
        images.append(v)
        # S(sum v_j(k) f(k+j)) = sum v_j(k+1) f(k+1+j)
        sh = [c.shift(1) for c in v]
        nxt = [RatFunc(0)] + sh[:-1]
        top = sh[-1]
        if not top.is_zero():
            nxt = [nxt[j] + top * reduce_row[j] for j in range(d)]
        v = nxt
    return images


def _unsafe_indices(rec: Recurrence, count: int) -> list[int]:
    """Integer k where p_d(k + t) vanishes for some reduction step t."""
    roots = rec.coeffs[-1].integer_roots()
    return [r - t for r in roots for t in range(max(count - rec.order, 0) + 1)]


def _solve_closure(columns_for: Callable[[int], list[list[RatFunc]]], bound: int, base_offset: int, unsafe: list[int]) -> Recurrence:
    for order in range(1, bound + 1):
        cols = columns_for(order + 1)
        nrows = len(cols[0])
        matrix = [[cols[i][r] for i in range(order + 1)] for r in range(nrows)]
        ns = nullspace_ratfunc(matrix, order + 1)
        if not ns:
            continue
        v = ns[0]
        if v[-1].is_zero():
            raise ClosureError("nullspace vector at minimal order lacks a leading term")
        den = Poly.const(1)
        for c in v:
            den = den * c.den.exact_div(poly_gcd(den, c.den))
        polys = [c.num * den.exact_div(c.den) for c in v]
        polys, g = _content_free(polys)
        bad = list(unsafe)
        bad += den.integer_roots() if den.degree > 0 else []
        bad += g.integer_roots() if g.degree > 0 else []
        offset = max([base_offset] + [b + 1 for b in bad])
        return Recurrence(tuple(polys), offset)
    raise ClosureError(f"no annihilator of order <= {bound} found")


def closure_add(r1: Recurrence, r2: Recurrence) -> Recurrence:
    """Annihilator of f + g for f killed by r1 and g killed by r2 (order <= d1 + d2)."""
    bound = r1.order + r2.order

    def columns(count: int):
        a = _reduction_images(r1, count)
        b = _reduction_images(r2, count)
        return [a[i] + b[i] for i in range(count)]

    unsafe = _unsafe_indices(r1, bound + 1) + _unsafe_indices(r2, bound + 1)
    return _solve_closure(columns, bound, max(r1.offset, r2.offset), unsafe)


def closure_mul(r1: Recurrence, r2: Recurrence) -> Recurrence:
    """Annihilator of the termwise product f * g (order <= d1 * d2)."""
    bound = r1.order * r2.order

    def columns(count: int):
        a = _reduction_images(r1, count)
        b = _reduction_images(r2, count)
        return [[x * y for x, y in product(a[i], b[i])] for i in range(count)]

    unsafe = _unsafe_indices(r1, bound + 1) + _unsafe_indices(r2, bound + 1)
    return _solve_closure(columns, bound, max(r1.offset, r2.offset), unsafe)


# ---------------------------------------------------------------------------
# recurrence -> differential equation


@lru_cache(maxsize=None)
def _stirling2_table(n: int) -> tuple[int, ...]:
    row = [1]
    for m in range(1, n + 1):
        prev = row + [0]
        row = [0] * (m + 1)
        for k in range(1, m + 1):
            row[k] = k * prev[k] + prev[k - 1]
    return tuple(row)


def _theta_poly(p: Poly) -> list[Poly]:
    """p(theta) with theta = x d/dx, as coefficients of D^i."""
    out = [Poly() for _ in range(max(p.degree, 0) + 1)]
    for k, c in enumerate(p.coeffs):
        if c == 0:
            continue
        row = _stirling2_table(k)
        for i in range(k + 1):
            if row[i]:
                out[i] = out[i] + Poly([0] * i + [c * row[i]])
    return out


def rec_to_ode(rec: Recurrence, f: TermSource) -> DiffOp:
    """Operator annihilating sum_{k>=0} f_k x^k.

    sum_j x^(d-j) p_j(theta - j) maps the series to a polynomial P(x) built
    from the boundary terms k < offset; when P != 0 the operator is
    left-multiplied by (P D - P').
    """
    d = rec.order
    acc: dict[int, Poly] = {}
    for j, p in enumerate(rec.coeffs):
        if p.is_zero():
            continue
        for i, q in enumerate(_theta_poly(p.shift(-j))):
            if q.is_zero():
                continue
            acc[i] = acc.get(i, Poly()) + q * Poly([0] * (d - j) + [1])
    top = max(i for i, q in acc.items() if not q.is_zero())
    op = DiffOp(tuple(acc.get(i, Poly()) for i in range(top + 1)))

    boundary = [Fraction(0)] * (rec.offset + d)
    for n in range(-d, rec.offset):
        total = Fraction(0)
        for j, p in enumerate(rec.coeffs):
            if n + j >= 0 and not p.is_zero():
                total += p(n) * f(n + j)
        boundary[n + d] = total
    P = Poly(boundary)
    if not P.is_zero():
        op = DiffOp((-P.derivative(), P)).compose(op)
    op = op.normalized()

    check = ode_annihilates(op, f, 3 * (op.order + op.max_degree) + 1)
    if not check.annihilates:
        raise ValueError(f"boundary elimination left a residual at x^{check.first_nonzero}")
    return op


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
