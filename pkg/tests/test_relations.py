from dataclasses import fields, is_dataclass, replace
from fractions import Fraction

import pytest
from mpmath import mp, mpf

from zident.constexpr import Rat, parse_const_expr
from zident.mpfloat import PrecisionContext, PrecisionError, zeta
from zident.relations import (
    BasisEntry,
    NoRelationFound,
    certify,
    discover,
    digits_of_agreement,
    load_basis,
    load_identity,
)
from zident.sums import SeriesSpec

from .conftest import fixture

IDENTITIES = ["eq1", "eq2", "eq3a", "eq3b", "eq3c"]
CTX = PrecisionContext(60)


def identity(name):
    return load_identity(fixture(f"{name}.json"))


def rat_perturbations(e):
    """Every copy of e with one rational literal's numerator moved by +-1."""
    if isinstance(e, Rat):
        for d in (1, -1):
            v = e.value
            new = Fraction(v.numerator + d, v.denominator)
            if new >= 0:
                yield Rat(new)
        return
    if not is_dataclass(e):
        return
    for f in fields(e):
        child = getattr(e, f.name)
        if is_dataclass(child):
            for alt in rat_perturbations(child):
                yield replace(e, **{f.name: alt})


def series_perturbations(spec: SeriesSpec):
    for i, t in enumerate(spec.terms):
        for d in (1, -1):
            yield spec.with_coeff(i, Fraction(t.coeff.numerator + d, t.coeff.denominator))


@pytest.mark.parametrize("name", IDENTITIES)
def test_certify_passes(name):
    spec, rhs = identity(name)
    rep = certify(spec, rhs, 50, 100)
    assert rep.passed
    assert rep.residual_high.value < mpf(10) ** -85
    assert rep.to_json()["result"] == "PASS"


@pytest.mark.parametrize("name", IDENTITIES)
def test_soundness_under_perturbation(name):
    spec, rhs = identity(name)
    count = 0
    for alt in rat_perturbations(rhs):
        assert not certify(spec, alt, 50, 100).passed
        count += 1
    for alt in series_perturbations(spec):
        assert not certify(alt, rhs, 50, 100).passed
        count += 1
    assert count >= 8


def test_certify_fail_magnitude():
    spec, _ = identity("eq1")
    wrong = parse_const_expr("-45/7*zeta(7)+13/3*zeta(2)*zeta(5)+85/6*zeta(3)*zeta(4)")
    rep = certify(spec, wrong, 50, 100)
    assert not rep.passed
    # (45/7 - 45/8) zeta(7) = 45/56 zeta(7)
    with mp.workdps(40):
        expected = mpf(45) / 56 * zeta(7, PrecisionContext(30)).value
        assert abs(rep.residual_high.value - expected) < mpf(10) ** -18
    assert round(float(rep.residual_high), 4) == 0.8103
    assert rep.to_json()["result"] == "FAIL"


def test_certify_requires_doubling():
    spec, rhs = identity("eq1")
    with pytest.raises(ValueError):
        certify(spec, rhs, 50, 80)


ZETA_BASIS = load_basis(fixture("zeta_products.json"))
W7 = load_basis(fixture("weight7.json"))


@pytest.mark.parametrize(
    "name, basis, expected",
    [
        ("eq1", ZETA_BASIS, ["-45/8", "13/3", "85/6"]),
        ("eq2", ZETA_BASIS, ["-259/24", "-98/9", "697/18"]),
        ("eq3a", W7, ["-205/18", "5/18", "1/18", "-1/486", "1/8"]),
        ("eq3b", W7, ["-7337/216", "11/81", "1417/4860", "-4/729", "1/3"]),
        ("eq3c", W7, ["-1/72", "8/81", "-17/4860", "0", "0"]),
    ],
)
def test_discover(name, basis, expected):
    spec, rhs = identity(name)
    res = discover(spec, basis, CTX)
    assert res.coefficients == tuple(Fraction(c) for c in expected)
    assert res.certified_digits >= 30
    assert res.residual.value < mpf(10) ** -res.certified_digits
    # discovered form certifies and agrees with the stored RHS exactly
    assert certify(spec, res.as_expr(), 50, 100).passed
    from zident.constexpr import expand

    assert expand(res.as_expr()) == expand(rhs)


def test_discover_json():
    spec, _ = identity("eq1")
    data = discover(spec, ZETA_BASIS, CTX).to_json()
    assert data["coefficients"] == {"zeta7": "-45/8", "zeta2zeta5": "13/3", "zeta3zeta4": "85/6"}
    assert data["rhs"] == "-45/8*zeta(7)+13/3*zeta(2)*zeta(5)+85/6*zeta(3)*zeta(4)"


def test_discover_no_relation():
    spec, _ = identity("eq1")
    basis = [BasisEntry.parse("zeta7", "zeta(7)"), BasisEntry.parse("pi7", "pi^7")]
    with pytest.raises(NoRelationFound) as info:
        discover(spec, basis, CTX, max_height=10**6)
    assert info.value.bound > 10**6


def test_discover_dependent_basis():
    spec, _ = identity("eq1")
    basis = [BasisEntry.parse("z2", "zeta(2)"), BasisEntry.parse("pi2", "pi^2")]
    with pytest.raises(ValueError):
        discover(spec, basis, CTX, max_height=1000)


def test_discover_precision_guard():
    spec, _ = identity("eq3a")
    with pytest.raises(PrecisionError):
        discover(spec, W7, PrecisionContext(30), max_height=10**9)


def test_basis_loading():
    assert [b.name for b in W7] == ["zeta7", "pi2zeta5", "pi4zeta3", "pi7_over_sqrt3", "sqrt3_c_pi3"]
    bare = load_basis([{"name": "a", "expr": "zeta(3)"}])
    assert bare[0].expr == parse_const_expr("zeta(3)")
    with pytest.raises(ValueError):
        load_basis([{"name": "a", "expr": "pi"}, {"name": "a", "expr": "pi^2"}])
    with pytest.raises(ValueError):
        load_basis({"format": "other/9", "basis": []})
    with pytest.raises(ValueError):
        load_basis([])


def test_digits_of_agreement():
    with mp.workdps(40):
        assert digits_of_agreement(mp.pi, mp.pi + mpf(10) ** -20) in (19, 20)
        assert digits_of_agreement(mp.pi, mp.pi) > 100
