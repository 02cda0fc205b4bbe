from fractions import Fraction
from math import comb

import pytest
from mpmath import mp, mpf

from zident.mpfloat import PrecisionContext, PrecisionError
from zident.sums import SeriesSpec, SeriesTerm, eval_series, iter_terms_exact, tail_bound, term_exact, term_source

EQ1 = SeriesSpec.of((33, 5, 2), (4, 0, 7))
EQ2 = SeriesSpec.of((33, 3, 4), (8, 0, 7))


def brute(spec: SeriesSpec, n: int, dps: int):
    """Independent oracle: plain mpf summation of n terms."""
    with mp.workdps(dps):
        total = mpf(0)
        H = {}
        for j in range(1, n + 1):
            for t in spec.terms:
                if t.h:
                    H[t.h] = H.get(t.h, mpf(0)) + mpf(j) ** -t.h
            num = mp.fsum(mpf(t.coeff.numerator) / t.coeff.denominator * (H[t.h] if t.h else 1) / mpf(j) ** t.kpow for t in spec.terms)
            total += num / comb(2 * j, j)
        return total


def test_term_exact_examples():
    assert term_exact(EQ1, 1) == Fraction(37, 2)
    assert term_exact(EQ1, 2) == Fraction(1093, 768)
    assert term_exact(SeriesSpec.of((1, 0, 2)), 3) == Fraction(1, 180)
    with pytest.raises(ValueError):
        term_exact(EQ1, 0)


def test_term_exact_matches_definition():
    for j in range(1, 30):
        h5 = sum(Fraction(1, i**5) for i in range(1, j + 1))
        assert term_exact(EQ1, j) == (33 * h5 + Fraction(4, j**5)) / (j**2 * comb(2 * j, j))


def test_spec_validation():
    with pytest.raises(ValueError):
        SeriesTerm(1, 1, 3)
    with pytest.raises(ValueError):
        SeriesTerm(1, 0, 1)
    with pytest.raises(ValueError):
        SeriesTerm(1, 5, 5)
    with pytest.raises(ValueError):
        SeriesSpec(())
    assert SeriesSpec.from_json(EQ1.to_json()) == EQ1
    assert EQ1.to_json() == {"terms": [{"coeff": "33", "h": 5, "kpow": 2}, {"coeff": "4", "h": 0, "kpow": 7}]}


def test_eval_eq1():
    res = eval_series(EQ1, PrecisionContext(100))
    assert res.value.digits_str().startswith("20.1503")
    with mp.workdps(130):
        assert abs(res.value.value - brute(EQ1, 400, 130)) < mpf(10) ** -99
    assert res.terms_used >= 1
    assert res.tail_bound.value < mpf(10) ** -105


def test_eval_eq2():
    res = eval_series(EQ2, PrecisionContext(60))
    assert round(float(res.value), 4) == 20.9235
    with mp.workdps(90):
        assert abs(res.value.value - brute(EQ2, 300, 90)) < mpf(10) ** -59


def test_eval_first_term_dominates():
    res = eval_series(SeriesSpec.of((1, 0, 9)), PrecisionContext(30))
    assert res.value.digits_str().startswith("0.5003")
    assert abs(float(res.value.value) - 0.5) < 1e-3


def test_exact_prefix_matches_float_sum():
    it = iter_terms_exact(EQ1)
    exact = sum((next(it) for _ in range(50)), Fraction(0))
    with mp.workdps(80):
        assert abs(mpf(exact.numerator) / exact.denominator - brute(EQ1, 50, 80)) < mpf(10) ** -75


def test_tail_bound_properties():
    prev = None
    for k0 in (5, 10, 20, 40, 80):
        b = tail_bound(EQ1, k0).value
        with mp.workdps(60):
            diff = abs(brute(EQ1, 2 * k0, 60) - brute(EQ1, k0, 60))
            full = abs(brute(EQ1, 400, 60) - brute(EQ1, k0, 60))
        assert b >= diff and b >= full
        if prev is not None:
            assert b < prev
        prev = b
    assert tail_bound(EQ1, 200).value < mpf(10) ** -110
    with pytest.raises(ValueError):
        tail_bound(EQ1, 0)


def test_tail_bound_with_negative_coefficients():
    spec = SeriesSpec.of((3, 2, 5), (-1, 0, 7))
    for k0 in (3, 10, 30):
        with mp.workdps(50):
            assert tail_bound(spec, k0).value >= abs(brute(spec, 300, 50) - brute(spec, k0, 50))


def test_refinement():
    lo = eval_series(EQ1, PrecisionContext(50)).value
    hi = eval_series(EQ1, PrecisionContext(100)).value
    with mp.workdps(110):
        assert abs(lo.value - hi.value) < mpf(10) ** -45


def test_terms_max():
    with pytest.raises(PrecisionError):
        eval_series(EQ1, PrecisionContext(100), terms_max=100)


def test_term_source_shift():
    f0 = term_source(EQ1)
    f1 = term_source(EQ1, 1)
    assert f0(0) == 0 and f0(1) == Fraction(37, 2)
    assert f1(0) == Fraction(37, 2) and f1(1) == Fraction(1093, 768)
    assert f1(-3) == 0
