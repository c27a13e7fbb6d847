import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import all_words_depth, random_field_instance

from hypoel.brackets import depth_to_gevrey_fact, hormander_depth, lie_bracket, rank_exact
from hypoel.irregularity import (irregularity, irregularity_thresholds, sharpness_fact,
                                 sigma_from_orders, vanishing_order)
from hypoel.operator_core import CoeffExpr, VectorField, parse_coeff, parse_operator
from hypoel.operator_core.poly import from_iterable
from hypoel.symbol_analysis import (characteristic_set_sample, is_elliptic, nondegenerate_at,
                                    principal_symbol, tube_decompose)


# symbols and ellipticity

def test_principal_symbol_of_laplacian():
    p = principal_symbol(parse_operator("Dx^2 + Dy^2"))
    assert p.degree == 2
    assert str(p) == "-xi_x^2 - xi_y^2"


@pytest.mark.parametrize("text,verdict", [
    ("Dx^2 + Dy^2", "elliptic"),
    ("Dx + i*Dy", "elliptic"),
    ("Dt - Dx^2", "not_elliptic"),
    ("Dx^2 - Dy^2", "not_elliptic"),
    ("Dx + i*x*Dy", "not_elliptic"),
])
def test_ellipticity_verdicts(text, verdict):
    assert is_elliptic(parse_operator(text)).verdict == verdict


def test_ellipticity_witness_lies_on_the_characteristic_set():
    rep = is_elliptic(parse_operator("Dx + i*x*Dy"))
    assert rep.witness_x is not None and abs(rep.witness_x["x"]) < 1e-6


def test_characteristic_sample_of_wave_operator():
    cs = characteristic_set_sample(parse_operator("Dx^2 - Dy^2"))
    assert len(cs) > 0
    for (_, xi), v in zip(cs.points, cs.values):
        assert abs(abs(xi[0]) - abs(xi[1])) < 1e-3


def test_tube_decomposition_of_bg():
    td = tube_decompose(parse_operator("Dt^2 + t^2*Dx1^2 + Dx2^2"), ["t"])
    assert td.guards_satisfied and td.x_vars == ("x1", "x2")


def test_tube_decomposition_rejects_x_dependence():
    assert tube_decompose(parse_operator("Dt^2 + x^2*Dx^2"), ["t"]) is None


def test_nondegenerate():
    P = parse_operator("x*Dx + 1")
    assert not nondegenerate_at(P, {"x": 0})
    assert nondegenerate_at(P, {"x": 2})
    with pytest.raises(ValueError):
        nondegenerate_at(parse_operator("x*y*Dx"), {"x": 1})


# irregularity

@pytest.mark.parametrize("k", range(1, 9))
def test_irregularity_family(k):
    rep = irregularity(parse_operator(f"x^{k + 1}*Dx - 2"), 0)
    assert rep.sigma == k + 1 and rep.exact


def test_irregularity_of_regular_singular_point():
    assert irregularity(parse_operator("x*Dx + 3"), 0).sigma == 1


def test_vanishing_order_transcendental():
    assert vanishing_order(parse_coeff("x^3*exp(x)"), "x", 0).value == 3
    assert vanishing_order(parse_coeff("sin(x)^2"), "x", 0).value == 2


@given(st.lists(st.integers(0, 6), min_size=2, max_size=5))
def test_sigma_matches_brute_force(orders):
    """sigma = max(1, max_i (ord a_m - ord a_i)/(m - i)) over nonvanishing a_i."""
    m = len(orders) - 1
    terms = " + ".join(f"x^{o}*Dx^{i}" for i, o in enumerate(orders))
    P = parse_operator(terms)
    ref = max([Fraction(1)] + [Fraction(orders[m] - orders[i], m - i) for i in range(m)])
    assert irregularity(P, 0).sigma == ref


def test_irregularity_thresholds_are_consistent():
    facts = irregularity_thresholds(3)
    assert any(f.second == "Cw" and f.constraint == "1 < s < 3/2" for f in facts)
    assert sharpness_fact(2).constraint == "s >= 3/2"


def test_irregularity_needs_one_variable():
    with pytest.raises(ValueError):
        irregularity(parse_operator("Dx + Dy"), 0)


# brackets

def test_bracket_of_heisenberg_fields():
    X, Y = parse_operator("Dx"), parse_operator("x*Dy")
    assert lie_bracket(X, Y) == VectorField.from_operator(parse_operator("Dy", ["x", "y"]))


def test_rank_exact():
    F = Fraction
    assert rank_exact([[F(1), F(2)], [F(2), F(4)]]) == 1
    assert rank_exact([[F(1), F(0)], [F(0), F(1)]]) == 2


def test_depth_examples():
    assert hormander_depth([parse_operator("Dt"), parse_operator("t*Dx")], {}).depth == 2
    assert hormander_depth([parse_operator("Dt"), parse_operator("t^3*Dx")], {}).depth == 4
    assert hormander_depth([parse_operator("Dt"), parse_operator("t^3*Dx")], {}, max_len=3).depth is None
    assert hormander_depth([parse_operator("Dt"), parse_operator("t*Dx")], {"t": 1}).depth == 1


def test_depth_to_fact():
    assert depth_to_gevrey_fact(3).constraint == "s >= 3"


def test_complex_fields_rejected():
    with pytest.raises(ValueError):
        hormander_depth([parse_operator("Dx + i*x*Dy")], {})


def _to_operator(n, comps):
    names = [f"x{i}" for i in range(n)]
    cs = [CoeffExpr(from_iterable([({names[i]: k for i, k in enumerate(e) if k}, c) for e, c in p.items()]))
          for p in comps]
    return VectorField.from_components(cs, names)


@pytest.mark.parametrize("seed", range(4))
def test_depth_agrees_with_all_words_oracle(seed):
    rng = random.Random(seed)
    for _ in range(25):
        n, fields, point = random_field_instance(rng)
        ops = [_to_operator(n, f) for f in fields]
        got = hormander_depth(ops, {f"x{i}": v for i, v in enumerate(point)}, max_len=4).depth
        assert got == all_words_depth(fields, point, 4)
