from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from hypoel.params import IntervalSet, Zone
from hypoel.sheaf_lattice import (FAILS, HOLDS, LatticeError, SheafSpace, check_fact, compose_hypo,
                                  includes, make_fact, parse_space, relation, restrict_hypo,
                                  widen_negative)

fracs = st.fractions(min_value=1, max_value=6, max_denominator=6)


@st.composite
def spaces(draw):
    tag = draw(st.sampled_from(["Cw", "GR", "GB", "Cinf", "H", "D", "UR", "UB", "B"]))
    if tag in ("Cw", "Cinf", "D", "B"):
        return SheafSpace(tag)
    if tag == "H":
        return SheafSpace.sobolev(draw(st.fractions(min_value=-4, max_value=4, max_denominator=4)))
    v = draw(fracs)
    if tag != "GR":
        assume(v > 1)
    if tag in ("GR", "GB"):
        return SheafSpace.gevrey(v, beurling=(tag == "GB"))
    return SheafSpace.ultra(v, beurling=(tag == "UB"))


@given(spaces())
def test_inclusion_is_reflexive(a):
    assert includes(a, a)


@given(spaces(), spaces(), spaces())
def test_inclusion_is_transitive(a, b, c):
    if includes(a, b) and includes(b, c):
        assert includes(a, c)


@given(spaces(), spaces())
def test_inclusion_is_antisymmetric(a, b):
    if includes(a, b) and includes(b, a):
        assert a == b


@given(spaces())
def test_text_roundtrip(a):
    assert parse_space(a.text()) == a


@given(fracs, fracs)
def test_gevrey_chain(s, t):
    """G{s} in G({t}) iff s < t, G({s}) in G{s}, and all Gevrey classes sit in Cinf."""
    assume(t > 1)
    assert includes(SheafSpace.gevrey(s), SheafSpace.gevrey(t, beurling=True)) == (s < t)
    if s > 1:
        assert includes(SheafSpace.gevrey(s, beurling=True), SheafSpace.gevrey(s))
    assert includes(SheafSpace.gevrey(s), parse_space("Cinf"))


@given(fracs, fracs)
def test_ultradistribution_chain(s, t):
    assume(s > 1 and t > 1)
    assert includes(parse_space("D'"), SheafSpace.ultra(s))
    assert includes(SheafSpace.ultra(s), SheafSpace.ultra(t)) == (t <= s)
    assert includes(SheafSpace.ultra(s, beurling=True), SheafSpace.ultra(t)) == (t < s)
    assert includes(SheafSpace.ultra(s), parse_space("B"))


def test_fixed_chain():
    chain = [parse_space(t) for t in ("Cw", "G{2}", "Cinf", "H{3}", "L2", "H{-2}", "D'", "D'{3}", "D'{2}", "B")]
    for i, a in enumerate(chain):
        for b in chain[i:]:
            assert includes(a, b)
        for b in chain[:i]:
            assert not includes(a, b)


def test_gevrey_one_is_analytic():
    assert parse_space("G{1}") == parse_space("Cw")
    with pytest.raises(LatticeError):
        parse_space("G({1})")


def test_parametric_relation_is_a_constraint():
    r = relation(parse_space("G{s}"), parse_space("G({t})"))
    assert not isinstance(r, bool)
    z = Zone.universe(["s", "t"]).add(r)
    assert z.contains_point({"s": 2, "t": 3}) and not z.contains_point({"s": 3, "t": 3})


# facts

def test_make_fact_rejects_inverted_pair():
    with pytest.raises(LatticeError):
        make_fact("P", "pair", HOLDS, [parse_space("Cinf"), parse_space("D'")])


def test_parametric_fact_domain_and_check():
    f = make_fact("P", "pair", HOLDS, [parse_space("D'"), parse_space("G{s}")], Zone.parse("s >= 2", ["s"]))
    check_fact(f)
    assert f.zone.contains_point({"s": 2}) and not f.zone.contains_point({"s": 1})


def test_compose_restrict_widen():
    f1 = make_fact("P", "pair", HOLDS, [parse_space("D'"), parse_space("Cinf")])
    f2 = make_fact("P", "pair", HOLDS, [parse_space("Cinf"), parse_space("Cw")])
    c = compose_hypo(f1, f2)
    assert c.spaces == (parse_space("D'"), parse_space("Cw"))
    r = restrict_hypo(f1, parse_space("L2"))
    assert r.spaces == (parse_space("L2"), parse_space("Cinf"))
    n = make_fact("P", "pair", FAILS, [parse_space("Cinf"), parse_space("Cw")])
    w = widen_negative(n, parse_space("D'"))
    assert w.polarity == FAILS and w.spaces[0] == parse_space("D'")
    with pytest.raises(LatticeError):
        compose_hypo(f2, f1)


# zones and intervals

bounds = st.integers(-5, 5)


@given(bounds, bounds, bounds, bounds)
def test_zone_intersection_is_pointwise(a, b, c, d):
    z1 = Zone.parse(f"s >= {a}, s <= {b}", ["s"])
    z2 = Zone.parse(f"s > {c}, s < {d}", ["s"])
    z = z1.intersect(z2)
    for k in range(-12, 13):
        x = Fraction(k, 2)
        assert z.contains_point({"s": x}) == (z1.contains_point({"s": x}) and z2.contains_point({"s": x}))


@given(bounds, bounds)
def test_zone_inclusion(a, b):
    big = Zone.parse(f"s >= {min(a, b)}", ["s"])
    small = Zone.parse(f"s >= {max(a, b)}", ["s"])
    assert big.includes(small)
    assert small.includes(big) == (a == b)


@given(bounds, bounds)
def test_two_variable_projection(a, b):
    z = Zone.parse(f"s - r >= {a}, r >= {b}", ["r", "s"])
    p = z.project(["s"])
    for k in range(-12, 13):
        assert p.contains_point({"s": k}) == (k >= a + b)


def test_interval_set_text():
    z = Zone.parse("s >= 1, s < 2", ["s"])
    iv = IntervalSet.from_zone(z, "s")
    assert str(iv) == "[1, 2)"
    u = iv.union(IntervalSet.from_zone(Zone.parse("s >= 2", ["s"]), "s"))
    assert str(u) == "[1, inf)"
    assert str(IntervalSet()) == "{}"
    assert IntervalSet.parse("1 <= s < 2", "s") == iv
