"""Discovery and numeric certification of closed forms for central-binomial series."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from mpmath import mp, mpf

from .constexpr import BinOp, ConstExpr, Neg, Rat, eval_mpf, parse_const_expr, print_const_expr
from .exact import format_rational
from .mpfloat import MPReal, PrecisionContext, PrecisionError
from .pslq import DEFAULT_MAX_HEIGHT, pslq, required_digits
from .sums import SeriesSpec, eval_series

__all__ = [
    "BasisEntry",
    "DiscoveryResult",
    "CertifyReport",
    "NoRelationFound",
    "discover",
    "certify",
    "load_basis",
    "load_identity",
    "FORMAT",
    "digits_of_agreement",
]

FORMAT = "zident/1"
CERTIFY_SLACK = 15


class NoRelationFound(LookupError):
    def __init__(self, message: str, bound: float):
        super().__init__(message)
        self.bound = bound


@dataclass(frozen=True)
class BasisEntry:
    name: str
    expr: ConstExpr

    @classmethod
    def parse(cls, name: str, text: str) -> BasisEntry:
        return cls(name, parse_const_expr(text))

    def to_json(self) -> dict:
        return {"name": self.name, "expr": print_const_expr(self.expr)}


def _check_basis(basis: Sequence[BasisEntry]) -> None:
    if not basis:
        raise ValueError("basis must not be empty")
    names = [b.name for b in basis]
    if len(set(names)) != len(names):
        raise ValueError("basis names must be unique")


def load_basis(data) -> list[BasisEntry]:
    """Accept ``{"format": ..., "basis": [...]}`` or a bare entry list."""
    if isinstance(data, dict):
        fmt = data.get("format", FORMAT)
        if fmt != FORMAT:
            raise ValueError(f"unsupported basis format {fmt!r}")
        data = data.get("basis")
    if not isinstance(data, list):
        raise ValueError("basis JSON must be a list of {name, expr} entries")
    basis = [BasisEntry.parse(str(e["name"]), str(e["expr"])) for e in data]
    _check_basis(basis)
    return basis


def load_identity(data: dict) -> tuple[SeriesSpec, ConstExpr]:
    fmt = data.get("format", FORMAT)
    if fmt != FORMAT:
        raise ValueError(f"unsupported identity format {fmt!r}")
    return SeriesSpec.from_json(data["series"]), parse_const_expr(data["rhs"])


def _scale(coeff: ConstExpr, e: ConstExpr) -> ConstExpr:
    """coeff * e, pushed into the leftmost factor of a product chain."""
    if isinstance(e, BinOp) and e.op in "*/":
        return BinOp(e.op, _scale(coeff, e.left), e.right)
    return BinOp("*", coeff, e)


@dataclass(frozen=True)
class DiscoveryResult:
    coefficients: tuple[Fraction, ...]
    residual: MPReal
    certified_digits: int
    basis: tuple[BasisEntry, ...] = ()

    def as_expr(self) -> ConstExpr:
        """sum c_i * b_i, skipping zero coefficients."""
        out = None
        for c, b in zip(self.coefficients, self.basis):
            if c == 0:
                continue
            lead = Neg(Rat(-c)) if c < 0 and out is None else Rat(abs(c))
            term = _scale(lead, b.expr)
            if out is None:
                out = term
            else:
                out = BinOp("-" if c < 0 else "+", out, term)
        return out if out is not None else Rat(Fraction(0))

    def to_json(self) -> dict:
        return {
            "coefficients": {b.name: format_rational(c) for b, c in zip(self.basis, self.coefficients)},
            "residual": str(self.residual),
            "certified_digits": self.certified_digits,
            "rhs": print_const_expr(self.as_expr()),
        }


def _basis_values(basis: Sequence[BasisEntry], dps: int) -> list[mpf]:
    return [eval_mpf(b.expr, dps) for b in basis]


def _residual(spec: SeriesSpec, coeffs: Sequence[Fraction], basis, ctx: PrecisionContext) -> mpf:
    s = eval_series(spec, ctx).value.value
    vals = _basis_values(basis, ctx.working)
    with mp.workdps(ctx.working):
        rhs = mp.fsum(mpf(c.numerator) / c.denominator * v for c, v in zip(coeffs, vals))
        return abs(s - rhs)


def discover(spec: SeriesSpec, basis: Sequence[BasisEntry], ctx: PrecisionContext, max_height: int | None = None) -> DiscoveryResult:
    """Express the series as a rational combination of the basis via PSLQ.

    Escalates once to double precision before giving up, and re-certifies
    any hit at twice the digits it was found at.
    """
    _check_basis(basis)
    basis = tuple(basis)
    n = len(basis) + 1
    last = None
    for attempt_ctx in (ctx, ctx.scaled(2)):
        height = max_height
        if height is None:
            # largest height the digits can support, capped by the default
            height = min(DEFAULT_MAX_HEIGHT, 10 ** int((attempt_ctx.target_digits - 15) / n))
        if required_digits(n, height) > attempt_ctx.target_digits:
            raise PrecisionError(f"{attempt_ctx.target_digits} digits cannot support height {height}")
        s = eval_series(spec, attempt_ctx).value
        xs = [s] + [MPReal.from_mpf(v, attempt_ctx.target_digits) for v in _basis_values(basis, attempt_ctx.working)]
        res = pslq(xs, attempt_ctx, height)
        if res.found:
            m = res.relation
            if m[0] == 0:
                raise ValueError("basis constants are linearly dependent over Q: " + str(m))
            coeffs = tuple(Fraction(-v, m[0]) for v in m[1:])
            check_ctx = attempt_ctx.scaled(2)
            resid = _residual(spec, coeffs, basis, check_ctx)
            with mp.workdps(30):
                digits = check_ctx.target_digits if resid == 0 else int(-mp.log10(resid))
            digits = min(digits, check_ctx.target_digits)
            if digits < attempt_ctx.target_digits - CERTIFY_SLACK:
                raise PrecisionError("PSLQ relation failed re-certification at double precision")
            return DiscoveryResult(coeffs, MPReal.from_mpf(resid, 30), digits, basis)
        last = res
    raise NoRelationFound(
        f"no relation with height <= {height}; every relation has norm >= {last.norm_bound:.3g}",
        last.norm_bound,
    )


@dataclass(frozen=True)
class CertifyReport:
    passed: bool
    residual_low: MPReal
    residual_high: MPReal
    terms_used_low: int
    terms_used_high: int
    low_digits: int
    high_digits: int
    threshold_exponent: int  # pass iff residual_high < 10^threshold_exponent

    def to_json(self) -> dict:
        return {
            "result": "PASS" if self.passed else "FAIL",
            "residual_low": str(self.residual_low),
            "residual_high": str(self.residual_high),
            "terms_used_low": self.terms_used_low,
            "terms_used_high": self.terms_used_high,
            "digits": [self.low_digits, self.high_digits],
            "threshold": f"1e{self.threshold_exponent}",
        }


def certify(spec: SeriesSpec, rhs: ConstExpr, low_digits: int = 50, high_digits: int = 100) -> CertifyReport:
    """|LHS - RHS| at two precisions; PASS iff the high one is < 10^-(high - 15)."""
    if high_digits < 2 * low_digits:
        raise ValueError("high_digits must be at least twice low_digits")
    out = []
    for digits in (low_digits, high_digits):
        ctx = PrecisionContext(digits)
        lhs = eval_series(spec, ctx)
        with mp.workdps(ctx.working):
            r = abs(lhs.value.value - eval_mpf(rhs, ctx.working))
        out.append((MPReal.from_mpf(r, 20), lhs.terms_used))
    threshold = -(high_digits - CERTIFY_SLACK)
    with mp.workdps(30):
        passed = out[1][0].value < mpf(10) ** threshold
    return CertifyReport(passed, out[0][0], out[1][0], out[0][1], out[1][1], low_digits, high_digits, threshold)


def digits_of_agreement(a: mpf, b: mpf) -> int:
    with mp.workdps(30):
        d = abs(a - b)
        return 10**6 if d == 0 else int(-mp.log10(d / max(1, abs(a))))

