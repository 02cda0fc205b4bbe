"""Constant expressions: parsing, printing, numeric evaluation and exact
expansion into rational combinations of monomials in pi, sqrt(r), zeta(n)
and hzeta(s, a).

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ['^' INT]
    atom   := rational | 'pi' | 'sqrt(' INT ')' | 'zeta(' INT ')'
            | 'hzeta(' INT ',' rational ')' | '(' expr ')'
    rational := INT ['/' INT]

An INT '/' INT pair is one literal unless it directly follows '/' or the
second INT carries '^', so a/2/3 = (a/2)/3 and 1/2^3 = 1/(2^3).
"""
from __future__ import annotations

import re
import textwrap
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Union

from mpmath import mp, mpf

from .exact import bernoulli, format_rational
from .mpfloat import MPReal, PrecisionContext, hurwitz_mpf, pi_mpf, sqrt_mpf, zeta_mpf

__all__ = [
    "Rat",
    "Pi",
    "Sqrt",
    "Zeta",
    "HZeta",
    "BinOp",
    "Pow",
    "Neg",
    "ConstExpr",
    "ConstExprError",
    "parse_const_expr",
    "print_const_expr",
    "eval_const_expr",
    "eval_mpf",
    "expand",
    "Monomial",
    "GRAMMAR",
    "linear_form_str",
]

_rules, _note = __doc__.split("Grammar (whitespace-insensitive)::", 1)[1].strip("\n").split("\n\n", 1)
GRAMMAR = textwrap.dedent(_rules) + "\n\n" + _note.strip()


class ConstExprError(ValueError):
    def __init__(self, message: str, position: int | None = None, expected: tuple[str, ...] = ()):
        self.position = position
        self.expected = expected
        detail = message
        if position is not None:
            detail += f" at position {position}"
        if expected:
            detail += f" (expected {' or '.join(expected)})"
        super().__init__(detail)


@dataclass(frozen=True)
class Rat:
    value: Fraction

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("rational literals are non-negative; use Neg")


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Sqrt:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("sqrt of a negative integer")


@dataclass(frozen=True)
class Zeta:
    s: int

    def __post_init__(self):
        if self.s < 2:
            raise ConstExprError(f"zeta({self.s}) is outside the domain s >= 2")


@dataclass(frozen=True)
class HZeta:
    s: int
    a: Fraction

    def __post_init__(self):
        if self.s < 2:
            raise ConstExprError(f"hzeta({self.s}, ...) is outside the domain s >= 2")
        if not 0 < self.a <= 1:
            raise ConstExprError("hzeta second argument must lie in (0, 1]")


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "ConstExpr"
    right: "ConstExpr"


@dataclass(frozen=True)
class Pow:
    base: "ConstExpr"
    exp: int

    def __post_init__(self):
        if self.exp < 1:
            raise ConstExprError("powers must be >= 1")


@dataclass(frozen=True)
class Neg:
    operand: "ConstExpr"


ConstExpr = Union[Rat, Pi, Sqrt, Zeta, HZeta, BinOp, Pow, Neg]


def add(*xs: ConstExpr) -> ConstExpr:
    out = xs[0]
    for x in xs[1:]:
        out = BinOp("+", out, x)
    return out


def mul(*xs: ConstExpr) -> ConstExpr:
    out = xs[0]
    for x in xs[1:]:
        out = BinOp("*", out, x)
    return out


def rational(q) -> ConstExpr:
    q = Fraction(q)
    return Neg(Rat(-q)) if q < 0 else Rat(q)


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]+)|(.))")


def _tokenize(s: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if m is None or m.end() == pos:
            break
        if m.group(0).strip() == "":
            pos = m.end()
            continue
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(("int", m.group(1), start))
        elif m.group(2):
            out.append(("name", m.group(2), start))
        else:
            out.append(("op", m.group(3), start))
        pos = m.end()
    out.append(("end", "", len(s)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.after_div = False

    def peek(self, ahead: int = 0):
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str, value: str | None = None, label: str | None = None):
        t = self.peek()
        if t[0] != kind or (value is not None and t[1] != value):
            shown = t[1] if t[0] != "end" else "end of input"
            raise ConstExprError(f"unexpected {shown!r}", t[2], (label or repr(value or kind),))
        return self.take()

    def parse(self) -> ConstExpr:
        e = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ConstExprError(f"unexpected {t[1]!r}", t[2], ("'+'", "'-'", "'*'", "'/'", "end of input"))
        return e

    def expr(self):
        e = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            e = BinOp(op, e, self.term())
        return e

    def term(self):
        e = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            self.after_div = op == "/"
            e = BinOp(op, e, self.unary())
        return e

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            t = self.expect("int", label="integer exponent")
            return Pow(base, int(t[1]))
        return base

    def int_arg(self) -> int:
        return int(self.expect("int", label="integer")[1])

    def rational_arg(self) -> Fraction:
        n = self.int_arg()
        if self.peek()[:2] == ("op", "/"):
            self.take()
            d = self.int_arg()
            if d == 0:
                raise ConstExprError("zero denominator", self.peek()[2])
            return Fraction(n, d)
        return Fraction(n)

    def atom(self):
        t = self.peek()
        fold = not self.after_div
        self.after_div = False
        if t[0] == "int":
            self.take()
            n = int(t[1])
            # fold INT '/' INT into one literal unless it is itself a divisor
            # or the denominator carries a power, so a/2/3 = (a/2)/3
            if (
                fold
                and self.peek()[:2] == ("op", "/")
                and self.peek(1)[0] == "int"
                and self.peek(2)[:2] != ("op", "^")
                and int(self.peek(1)[1]) != 0
            ):
                self.take()
                d = int(self.take()[1])
                return Rat(Fraction(n, d))
            return Rat(Fraction(n))
        if t[0] == "op" and t[1] == "(":
            self.take()
            e = self.expr()
            self.expect("op", ")")
            return e
        if t[0] == "name":
            self.take()
            name = t[1]
            if name == "pi":
                return Pi()
            if name in ("sqrt", "zeta", "hzeta"):
                self.expect("op", "(")
                pos = self.peek()[2]
                try:
                    if name == "sqrt":
                        node = Sqrt(self.int_arg())
                    elif name == "zeta":
                        node = Zeta(self.int_arg())
                    else:
                        s = self.int_arg()
                        self.expect("op", ",")
                        node = HZeta(s, self.rational_arg())
                except ConstExprError as err:
                    if err.position is None:
                        raise ConstExprError(str(err), pos) from None
                    raise
                self.expect("op", ")")
                return node
            raise ConstExprError(f"unknown name {name!r}", t[2], ("pi", "sqrt", "zeta", "hzeta"))
        shown = t[1] if t[0] != "end" else "end of input"
        raise ConstExprError(f"unexpected {shown!r}", t[2], ("number", "pi", "sqrt", "zeta", "hzeta", "'('", "'-'"))


def parse_const_expr(s: str) -> ConstExpr:
    return _Parser(s).parse()


# ---------------------------------------------------------------------------
# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(e) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Pow):
        return 4
    return 5


def _ends_in_integer(e) -> bool:
    """True when the printed form ends in an integer literal that a following
    '/INT' would fold into a fraction."""
    if isinstance(e, Rat):
        return e.value.denominator == 1
    if isinstance(e, Neg):
        return _prec(e.operand) >= 3 and _ends_in_integer(e.operand)
    if isinstance(e, BinOp) and e.op == "*":
        return _ends_in_integer(e.right)
    return False


def _needs_div_parens(left, right) -> bool:
    if isinstance(right, Neg):
        return True
    if isinstance(right, Rat):
        return right.value.denominator != 1 or _ends_in_integer(left)
    return False


def print_const_expr(e: ConstExpr) -> str:
    """Inverse of :func:`parse_const_expr` up to whitespace."""
    if isinstance(e, Rat):
        return format_rational(e.value)
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, Sqrt):
        return f"sqrt({e.n})"
    if isinstance(e, Zeta):
        return f"zeta({e.s})"
    if isinstance(e, HZeta):
        return f"hzeta({e.s},{format_rational(e.a)})"
    if isinstance(e, Neg):
        inner = print_const_expr(e.operand)
        return "-" + (f"({inner})" if _prec(e.operand) < 3 else inner)
    if isinstance(e, Pow):
        inner = print_const_expr(e.base)
        wrap = _prec(e.base) < 5 or (isinstance(e.base, Rat) and e.base.value.denominator != 1)
        return (f"({inner})" if wrap else inner) + f"^{e.exp}"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        left = print_const_expr(e.left)
        if _prec(e.left) < p:
            left = f"({left})"
        right = print_const_expr(e.right)
        if _prec(e.right) <= p or (e.op == "/" and _needs_div_parens(e.left, e.right)):
            right = f"({right})"
        return f"{left}{e.op}{right}"
    raise TypeError(f"not a constant expression: {e!r}")


# ---------------------------------------------------------------------------
# evaluation


def _exact(e) -> Fraction | None:
    """Exact value when the subtree is purely rational."""
    if isinstance(e, Rat):
        return e.value
    if isinstance(e, Neg):
        v = _exact(e.operand)
        return None if v is None else -v
    if isinstance(e, Pow):
        v = _exact(e.base)
        return None if v is None else v**e.exp
    if isinstance(e, BinOp):
        a, b = _exact(e.left), _exact(e.right)
        if a is None or b is None:
            return None
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0:
            raise ConstExprError("division by zero")
        return a / b
    return None


def eval_mpf(e: ConstExpr, dps: int) -> mpf:
    """Value at ``dps`` working digits."""
    q = _exact(e)
    if q is not None:
        with mp.workdps(dps):
            return mpf(q.numerator) / q.denominator
    if isinstance(e, Pi):
        return pi_mpf(dps)
    if isinstance(e, Sqrt):
        return sqrt_mpf(e.n, dps)
    if isinstance(e, Zeta):
        return zeta_mpf(e.s, dps)
    if isinstance(e, HZeta):
        return hurwitz_mpf(e.s, e.a, dps)
    with mp.workdps(dps):
        if isinstance(e, Neg):
            return -eval_mpf(e.operand, dps)
        if isinstance(e, Pow):
            return eval_mpf(e.base, dps) ** e.exp
        a = eval_mpf(e.left, dps)
        b = eval_mpf(e.right, dps)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0:
            raise ConstExprError("division by zero")
        return a / b


def eval_const_expr(e: ConstExpr, ctx: PrecisionContext) -> MPReal:
    return MPReal.from_mpf(eval_mpf(e, ctx.working), ctx.target_digits)


# ---------------------------------------------------------------------------
# exact expansion


@dataclass(frozen=True, order=True)
class Monomial:
    """pi^pi_pow * sqrt(radicand) * prod zeta(odd n)^e * prod hzeta(s,a)^e.

    ``radicand`` is squarefree; even zeta values are rewritten through
    Bernoulli numbers, so equal constants get equal monomials.
    """

    pi_pow: int = 0
    radicand: int = 1
    zetas: tuple[tuple[int, int], ...] = ()
    hzetas: tuple[tuple[int, Fraction, int], ...] = ()

    def __mul__(self, other: Monomial) -> tuple[Fraction, Monomial]:
        coeff, rad = _squarefree(self.radicand * other.radicand)
        z = dict(self.zetas)
        for n, k in other.zetas:
            z[n] = z.get(n, 0) + k
        h: dict = {}
        for s, a, k in self.hzetas + other.hzetas:
            h[(s, a)] = h.get((s, a), 0) + k
        mono = Monomial(
            self.pi_pow + other.pi_pow,
            rad,
            tuple(sorted(z.items())),
            tuple(sorted((s, a, k) for (s, a), k in h.items())),
        )
        return Fraction(coeff), mono

    def __str__(self) -> str:
        parts = []
        if self.pi_pow:
            parts.append("pi" if self.pi_pow == 1 else f"pi^{self.pi_pow}")
        if self.radicand != 1:
            parts.append(f"sqrt({self.radicand})")
        for n, k in self.zetas:
            parts.append(f"zeta({n})" + (f"^{k}" if k > 1 else ""))
        for s, a, k in self.hzetas:
            parts.append(f"hzeta({s},{format_rational(a)})" + (f"^{k}" if k > 1 else ""))
        return "*".join(parts) or "1"


def _squarefree(n: int) -> tuple[int, int]:
    """n = s^2 * r with r squarefree; returns (s, r)."""
    s, r = 1, 1
    d = 2
    m = n
    while d * d <= m:
        while m % (d * d) == 0:
            s *= d
            m //= d * d
        if m % d == 0:
            r *= d
            m //= d
        d += 1
    return s, r * m


LinearForm = dict  # Monomial -> Fraction


def _lf_mul(x: LinearForm, y: LinearForm) -> LinearForm:
    out: LinearForm = {}
    for ma, ca in x.items():
        for mb, cb in y.items():
            c, m = ma * mb
            out[m] = out.get(m, Fraction(0)) + ca * cb * c
    return {m: c for m, c in out.items() if c}


def _lf_add(x: LinearForm, y: LinearForm, sign: int = 1) -> LinearForm:
    out = dict(x)
    for m, c in y.items():
        out[m] = out.get(m, Fraction(0)) + sign * c
    return {m: c for m, c in out.items() if c}


def _zeta_even(n: int) -> Fraction:
    """zeta(n) / pi^n for even n."""
    b = bernoulli(n)
    return (-1) ** (n // 2 + 1) * b * 2 ** (n - 1) / factorial(n)


def expand(e: ConstExpr) -> LinearForm:
    """Exact normal form ``{Monomial: coefficient}``.

    Division is supported by single-monomial denominators without zeta
    factors; anything else raises :class:`ConstExprError`.
    """
    if isinstance(e, Rat):
        return {Monomial(): e.value} if e.value else {}
    if isinstance(e, Pi):
        return {Monomial(pi_pow=1): Fraction(1)}
    if isinstance(e, Sqrt):
        s, r = _squarefree(e.n) if e.n else (0, 1)
        return {Monomial(radicand=r): Fraction(s)} if s else {}
    if isinstance(e, Zeta):
        if e.s % 2 == 0:
            return {Monomial(pi_pow=e.s): _zeta_even(e.s)}
        return {Monomial(zetas=((e.s, 1),)): Fraction(1)}
    if isinstance(e, HZeta):
        if e.a == 1:
            return expand(Zeta(e.s))
        return {Monomial(hzetas=((e.s, e.a, 1),)): Fraction(1)}
    if isinstance(e, Neg):
        return {m: -c for m, c in expand(e.operand).items()}
    if isinstance(e, Pow):
        base = expand(e.base)
        out = {Monomial(): Fraction(1)}
        for _ in range(e.exp):
            out = _lf_mul(out, base)
        return out
    a = expand(e.left)
    b = expand(e.right)
    if e.op == "+":
        return _lf_add(a, b)
    if e.op == "-":
        return _lf_add(a, b, -1)
    if e.op == "*":
        return _lf_mul(a, b)
    if not b:
        raise ConstExprError("division by zero")
    if len(b) != 1:
        raise ConstExprError("cannot expand division by a sum")
    (m, c), = b.items()
    if m.zetas or m.hzetas:
        raise ConstExprError("cannot expand division by a zeta value")
    # 1/(c pi^p sqrt(r)) = sqrt(r) / (c r pi^p)
    inv = {Monomial(pi_pow=-m.pi_pow, radicand=m.radicand): 1 / (c * m.radicand)}
    return _lf_mul(a, inv)


def linear_form_str(form: LinearForm) -> str:
    if not form:
        return "0"
    out = ""
    for m, c in sorted(form.items()):
        sign = "-" if c < 0 else "+"
        body = f"{format_rational(abs(c))}*{m}"
        out += (f"-{body}" if sign == "-" else body) if not out else f" {sign} {body}"
    return out
