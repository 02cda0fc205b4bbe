"""Closed forms for central-binomial series with harmonic numerators.

Evaluates sum_k (sum_j a_j H_k^(h_j) / k^c_j) / C(2k, k) to high precision,
discovers rational relations with zeta values by PSLQ and certifies them,
and carries the supporting holonomic and iterated-integral machinery.
"""
__version__ = "0.1.0"

from .constexpr import eval_const_expr, expand, parse_const_expr, print_const_expr
from .mpfloat import MPReal, PrecisionContext, PrecisionError
from .relations import certify, discover
from .sums import SeriesSpec, SeriesTerm, eval_series

__all__ = [
    "MPReal",
    "PrecisionContext",
    "PrecisionError",
    "SeriesSpec",
    "SeriesTerm",
    "eval_series",
    "parse_const_expr",
    "print_const_expr",
    "eval_const_expr",
    "expand",
    "discover",
    "certify",
]
