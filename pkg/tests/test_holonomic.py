import json
from fractions import Fraction
from math import comb

import pytest

from zident import holonomic as hl
from zident.exact import Poly
from zident.holonomic import (
    DiffOp,
    Recurrence,
    closure_add,
    closure_mul,
    harmonic_source,
    ode_annihilates,
    rec_check,
    rec_for_harmonic,
    rec_hypergeometric,
    rec_to_ode,
)
from zident.sums import SeriesSpec, term_source

from .conftest import fixture

k = Poly.x()


def hyper7(j):
    """4 / (j^7 C(2j, j)), zero at j = 0."""
    return Fraction(4, j**7 * comb(2 * j, j)) if j >= 1 else Fraction(0)


def h5_term(j):
    return Fraction(33) * harmonic_source(5)(j) / (j**2 * comb(2 * j, j)) if j >= 1 else Fraction(0)


def printed_rec(name):
    return Recurrence.from_json(fixture(name))


def test_printed_first_recurrence_shifted():
    rec = printed_rec("rec1.json")
    f = lambda j: hyper7(j + 1)
    # k = 0 by hand: -1 * 2 + 2 * 64 * 3 / 192 = 0
    assert -1 * f(0) + 2 * 2**6 * 3 * f(1) == 0
    res = rec_check(rec, f, 100 + rec.order)
    assert res.holds and len(res.checked) >= 100


def test_printed_first_recurrence_unshifted_fails():
    rec = printed_rec("rec1.json")
    res = rec_check(Recurrence(rec.coeffs, 1), hyper7, 50)
    assert not res.holds and res.first_failure == 1


def test_printed_second_recurrence_shifted():
    rec = printed_rec("rec2.json")
    res = rec_check(rec, lambda j: h5_term(j + 1), 100 + rec.order)
    assert res.holds


def test_fixture_shift_matches_search():
    rec = printed_rec("rec1.json")
    assert hl.find_index_shift(rec, hyper7, 40) == fixture("rec1.json")["index_shift"] == 1


def test_constant_sequence():
    rec = Recurrence((Poly([-1]), Poly([1])))
    assert rec_check(rec, lambda j: Fraction(1), 20).holds


def test_rec_check_bounds():
    with pytest.raises(ValueError):
        rec_check(rec_for_harmonic(2), lambda j: Fraction(0), 1)


def geometric(b):
    return rec_hypergeometric(Poly([b]), Poly([1]))


def test_closure_add_geometric():
    r = closure_add(geometric(2), geometric(3))
    assert r.order == 2
    assert rec_check(r, lambda n: Fraction(2**n + 3**n), 50).holds
    # the minimal annihilator is f(n+2) - 5 f(n+1) + 6 f(n)
    c = r.coeffs
    assert all(p.degree == 0 for p in c)
    assert [p.coeffs[0] / c[2].coeffs[0] for p in c] == [6, -5, 1]


def test_closure_add_self():
    r = rec_for_harmonic(3)
    s = closure_add(r, r)
    assert s.order <= r.order
    two_h = lambda j: 2 * harmonic_source(3)(j)
    assert rec_check(s, two_h, 100).holds


def test_closure_add_harmonic_plus_hypergeometric():
    h = rec_for_harmonic(5)
    g = rec_hypergeometric(k**7, 2 * (2 * k + 1) * (k + 1) ** 6, offset=1)
    f = lambda j: harmonic_source(5)(j) + hyper7(j)
    for r in (closure_add(h, g), closure_add(g, h)):
        assert r.order <= 3
        assert rec_check(r, f, 100).holds


def test_closure_mul_hypergeometric():
    a = rec_hypergeometric(k + 1, Poly([3]))  # f(k) = k!/3^k
    b = rec_hypergeometric(Poly([2]), k + 2)  # g(k) = 2^k/(k+1)!
    r = closure_mul(a, b)
    assert r.order == 1
    fac = [1]
    for j in range(1, 60):
        fac.append(fac[-1] * j)
    prod = lambda j: Fraction(fac[j], 3**j) * Fraction(2**j, fac[j + 1])
    assert rec_check(r, prod, 50).holds


def test_closure_mul_harmonic_times_hypergeometric():
    h = rec_for_harmonic(5)
    # 33 / (k^2 C(2k,k)): ratio k^2 / (2 (2k+1) (k+1))
    g = rec_hypergeometric(k**2, 2 * (2 * k + 1) * (k + 1), offset=1)
    for r in (closure_mul(h, g), closure_mul(g, h)):
        assert r.order <= 2
        assert rec_check(r, h5_term, 100).holds
    # the printed recurrence kills the same terms, shifted by one
    assert rec_check(printed_rec("rec2.json"), lambda j: h5_term(j + 1), 100).holds


def test_closure_mul_constant():
    one = Recurrence((Poly([-1]), Poly([1])))
    r = closure_mul(one, rec_for_harmonic(2))
    assert r.order <= 2
    assert rec_check(r, harmonic_source(2), 100).holds


@pytest.mark.parametrize("a", [1, 2, 5])
def test_rec_for_harmonic(a):
    r = rec_for_harmonic(a)
    assert r.order == 2
    assert rec_check(r, harmonic_source(a), 100).holds
    assert rec_check(r, lambda j: harmonic_source(a)(j) + Fraction(7, 3), 100).holds
    if a == 1:
        assert [harmonic_source(1)(j) for j in (1, 2, 3)] == [1, Fraction(3, 2), Fraction(11, 6)]
    with pytest.raises(ValueError):
        rec_for_harmonic(0)


def test_rec_to_ode_geometric_one():
    rec = Recurrence((Poly([-1]), Poly([1])))
    op = rec_to_ode(rec, lambda j: Fraction(1))
    assert op.order == 1
    # proportional to (1 - x) D - 1
    q0, q1 = op.coeffs
    assert q1 * Poly([-1]) == q0 * Poly([1, -1])
    assert ode_annihilates(op, lambda j: Fraction(1), 30).annihilates


def test_rec_to_ode_printed_first():
    rec = printed_rec("rec1.json")
    f = lambda j: hyper7(j + 1)
    op = rec_to_ode(rec, f)
    assert op.order <= 8
    assert ode_annihilates(op, f, 60).annihilates
    assert ode_annihilates(op, f, 3 * (op.order + op.max_degree)).annihilates


def test_rec_to_ode_boundary_terms():
    # H_k^(2): shifts of the harmonic recurrence leave boundary terms at k < 0
    rec = rec_for_harmonic(2)
    op = rec_to_ode(rec, harmonic_source(2))
    assert ode_annihilates(op, harmonic_source(2), 3 * (op.order + op.max_degree)).annihilates


@pytest.mark.parametrize("name", ["ode1.json", "ode2.json"])
def test_printed_odes(name):
    data = fixture(name)
    op = DiffOp.from_json(data)
    assert op.order == data["order"]
    spec = SeriesSpec.from_json(fixture(data["series"]))
    f = term_source(spec, data["index_shift"])
    res = ode_annihilates(op, f, 60)
    assert res.annihilates
    assert len(res.residuals) == 60 - op.order - op.max_degree + 1


def test_printed_ode_needs_shift():
    data = fixture("ode1.json")
    op = DiffOp.from_json(data)
    f = term_source(SeriesSpec.from_json(fixture(data["series"])), 0)
    assert not ode_annihilates(op, f, 60).annihilates


def test_ode_perturbation_detected():
    data = fixture("ode1.json")
    op = DiffOp.from_json(data)
    f = term_source(SeriesSpec.from_json(fixture(data["series"])), 1)
    for j in (0, 3, op.order):
        coeffs = list(op.coeffs)
        coeffs[j] = coeffs[j] + Poly([1])
        res = ode_annihilates(DiffOp(tuple(coeffs)), f, 60)
        assert not res.annihilates and res.first_nonzero is not None


def test_ode_bounds():
    op = DiffOp((Poly([-1]), Poly([1, -1])))
    assert ode_annihilates(op, lambda j: Fraction(1), 3).annihilates
    with pytest.raises(ValueError):
        ode_annihilates(op, lambda j: Fraction(1), 2)


def test_json_round_trip():
    for name in ("rec1.json", "rec2.json"):
        r = printed_rec(name)
        assert Recurrence.from_json(json.loads(json.dumps(r.to_json()))) == r
        assert r.to_json()["var"] == "n"
    for name in ("ode1.json", "ode2.json"):
        op = DiffOp.from_json(fixture(name))
        back = DiffOp.from_json(json.loads(json.dumps(op.to_json())))
        assert back == op and op.to_json()["var"] == "x"


def test_shift_moves_offset():
    rec = printed_rec("rec1.json")
    g = rec.shift(1)
    assert g.offset == rec.offset + 1
    # g holds for hyper7 itself from k = 1
    assert rec_check(g, hyper7, 101).holds
