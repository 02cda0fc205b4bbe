import random
from fractions import Fraction
from math import comb, factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zident.exact import (
    Poly,
    RatFunc,
    bernoulli,
    binom_central,
    format_rational,
    nullspace,
    nullspace_ratfunc,
    parse_rational,
    poly_gcd,
)


def _mul(m, v):
    return [sum(Fraction(a) * b for a, b in zip(row, v)) for row in m]


def test_nullspace_rank_one():
    basis = nullspace([[1, 2], [2, 4]])
    assert len(basis) == 1
    v = basis[0]
    # proportional to (-2, 1)
    assert v[0] * 1 == v[1] * -2
    assert _mul([[1, 2], [2, 4]], v) == [0, 0]


def test_nullspace_full_rank():
    assert nullspace([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == []


def test_nullspace_single_row():
    basis = nullspace([[1, 1, 1]])
    assert len(basis) == 2
    for v in basis:
        assert sum(v) == 0


def test_nullspace_empty_matrix():
    basis = nullspace([], ncols=3)
    assert len(basis) == 3


def test_nullspace_rationals():
    m = [[Fraction(1, 2), Fraction(1, 3)], [Fraction(3, 2), 1]]
    (v,) = nullspace(m)
    assert _mul(m, v) == [0, 0]


@pytest.mark.parametrize("seed", range(20))
def test_nullspace_random(seed):
    rng = random.Random(seed)
    rows = rng.randint(1, 12)
    cols = rng.randint(1, 12)
    rank = rng.randint(0, min(rows, cols))
    # product of random factors has rank <= rank
    a = [[rng.randint(-9, 9) for _ in range(rank)] for _ in range(rows)]
    b = [[Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(cols)] for _ in range(rank)]
    m = [[sum(a[i][t] * b[t][j] for t in range(rank)) for j in range(cols)] for i in range(rows)]
    basis = nullspace(m)
    assert len(basis) >= cols - rank
    for v in basis:
        assert _mul(m, v) == [0] * rows


def test_nullspace_ratfunc():
    x = Poly.x()
    m = [[RatFunc(x), RatFunc(x * x)], [RatFunc(1), RatFunc(x)]]
    (v,) = nullspace_ratfunc(m)
    for row in m:
        assert (row[0] * v[0] + row[1] * v[1]).is_zero()


def test_bernoulli_values():
    assert bernoulli(0) == 1
    assert bernoulli(1) == Fraction(-1, 2)
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(12) == Fraction(-691, 2730)
    assert all(bernoulli(n) == 0 for n in range(3, 40, 2))
    with pytest.raises(ValueError):
        bernoulli(-1)


def test_bernoulli_recurrence():
    for n in range(1, 61):
        assert sum(comb(n + 1, j) * bernoulli(j) for j in range(n + 1)) == 0


def test_binom_central():
    assert [binom_central(k) for k in (0, 1, 5)] == [1, 2, 252]
    for k in range(501):
        assert binom_central(k + 1) * (k + 1) == 2 * (2 * k + 1) * binom_central(k)
    assert binom_central(30) == factorial(60) // factorial(30) ** 2


def test_rational_text():
    assert format_rational(Fraction(-45, 8)) == "-45/8"
    assert format_rational(Fraction(4)) == "4"
    assert parse_rational("13/3") == Fraction(13, 3)
    assert parse_rational(" -7 ") == -7
    with pytest.raises(ValueError):
        parse_rational("1/0")


big = st.integers(min_value=-(2**256), max_value=2**256)
rationals = st.builds(Fraction, big, st.integers(min_value=1, max_value=2**256))


@settings(max_examples=200, deadline=None)
@given(rationals, rationals, rationals)
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    if a:
        assert a * (1 / a) == 1


def test_poly_arithmetic():
    x = Poly.x()
    p = (x + 1) ** 3
    assert p.coeffs == (1, 3, 3, 1)
    q, r = p.divmod(x + 1)
    assert r.is_zero() and q == (x + 1) ** 2
    assert p.shift(-1) == x**3
    assert p.derivative() == 3 * (x + 1) ** 2
    assert p(2) == 27
    assert poly_gcd(p, (x + 1) * (x - 2)) == x + 1
    assert sorted(Poly.from_roots([3, -2, Fraction(1, 2)]).integer_roots()) == [-2, 3]
    content, prim = (Fraction(2, 3) * x + Fraction(4, 9)).primitive()
    assert prim == 3 * x + 2 and content * prim == Fraction(2, 3) * x + Fraction(4, 9)


def test_ratfunc_reduces():
    x = Poly.x()
    r = RatFunc(x * x - 1, x - 1)
    assert r == RatFunc(x + 1)
    assert (RatFunc(1, x) + RatFunc(1, x + 1)) == RatFunc(2 * x + 1, x * (x + 1))
    assert RatFunc(1, x).shift(1)(0) == 1
