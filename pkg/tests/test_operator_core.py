from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from hypoel.operator_core import (CoeffExpr, DiffOperator, DSLError, NonRationalLiteralError,
                                  OperatorSystem, UnknownVariableError, apply, commutator, commutes,
                                  format_operator, parse_coeff, parse_operator, transpose)
from hypoel.operator_core.coeff import sym
from hypoel.operator_core.gauss import GaussQ
from hypoel.operator_core.poly import Poly, monomial


def test_gauss_arithmetic():
    a, b = GaussQ(1, 2), GaussQ(Fraction(1, 3), -1)
    assert a * a.inverse() == GaussQ(1, 0)
    assert (a * b).conjugate() == a.conjugate() * b.conjugate()
    assert GaussQ(1, 2) * GaussQ(1, -2) == GaussQ(5, 0)
    assert GaussQ(3, 4).norm2() == 25


def test_apply_matches_hand_computation():
    P = parse_operator("x^2*Dx + 3")
    assert apply(P, parse_coeff("x^3")) == parse_coeff("3*x^4 + 3*x^3")


def test_transpose_first_order():
    # t(a D) u = -D(a u)
    P = parse_operator("x^2*Dx + 3")
    assert transpose(P) == parse_operator("-x^2*Dx - 2*x + 3")


def test_commutator_of_derivative_and_position():
    assert commutator(parse_operator("Dx"), parse_operator("x")) == parse_operator("1", ["x"])
    assert commutes(parse_operator("Dx^2 + Dy^2"), parse_operator("Dx"))


def test_parse_errors():
    with pytest.raises(NonRationalLiteralError):
        parse_operator("Dx + 0.5")
    with pytest.raises(UnknownVariableError):
        parse_operator("Dx + y", variables=["x"])
    with pytest.raises(DSLError):
        parse_operator("Dx^2 + (")


@pytest.mark.parametrize("text", ["Dx^2 + i*x*Dy", "Dt^2 + t^2*Dx1^2 + Dx2^2", "x^3*Dx - 2",
                                  "(Dx + i*x*Dy)^2", "Dt - Dx^2"])
def test_format_parse_roundtrip(text):
    P = parse_operator(text)
    assert parse_operator(format_operator(P), P.variables) == P


def test_non_polynomial_coefficients():
    c = parse_coeff("exp(x)*x")
    assert not c.is_polynomial()
    assert c.diff("x") == parse_coeff("exp(x)*x + exp(x)")
    P = parse_operator("exp(-1/x^2)*Dx")
    assert not P.has_polynomial_coefficients()


def test_first_integrals():
    sys_ = OperatorSystem([parse_operator("Dx + i*x*Dy")], [parse_coeff("x^2/2 + i*y")])
    assert sys_.first_integrals_ok()
    bad = OperatorSystem([parse_operator("Dx + i*x*Dy")], [parse_coeff("x + y")])
    assert not bad.first_integrals_ok()


small = st.integers(-3, 3)


@st.composite
def operators(draw):
    terms = []
    for _ in range(draw(st.integers(1, 4))):
        alpha = (draw(st.integers(0, 2)), draw(st.integers(0, 2)))
        c = monomial({"x": draw(st.integers(0, 2)), "y": draw(st.integers(0, 1))}, draw(small))
        terms.append((alpha, CoeffExpr(c)))
    acc = {}
    for a, c in terms:
        acc[a] = acc.get(a, CoeffExpr.const(0)) + c
    return DiffOperator(acc, ("x", "y"))


@given(operators())
def test_transpose_is_an_involution(P):
    assert transpose(transpose(P)) == P


@given(operators(), operators())
def test_transpose_reverses_products(P, Q):
    assert transpose(P.compose(Q)) == transpose(Q).compose(transpose(P))


@given(operators(), operators())
def test_composition_acts_as_composition(P, Q):
    f = parse_coeff("x^3*y^2 + x*y + 1")
    assert apply(P.compose(Q), f) == apply(P, apply(Q, f))


@given(operators())
def test_apply_agrees_with_sympy(P):
    x, y = sym("x"), sym("y")
    f = x ** 3 * y ** 2 + 2 * x * y
    ref = sympy.Integer(0)
    for (a, b), c in P.items():
        ref += c.to_sympy() * sympy.diff(f, x, a, y, b)
    got = apply(P, parse_coeff("x^3*y^2 + 2*x*y")).to_sympy()
    assert sympy.expand(got - ref) == 0
