import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import weierstrass_sinh

from hypoel.ultradiff import (LOG2, ConstSigma, ExpMajorant, GrowthSigma, PowerSigma, SigmaError,
                              TableMajorant, TableSigma, TruncationError, UltradiffSymbol, build_witness,
                              check_q_bound, check_strong_ellipticity, check_symbol_class, constant_symbol,
                              exp_decay, lower_bound_onset, measure_growth, parse_sigma, representation_mu,
                              sigma_from_dict, sigma_from_growth, upper_bound_fit)

SINH = UltradiffSymbol(1, ConstSigma(1))


def test_symbol_at_origin_is_one():
    v = UltradiffSymbol(2, PowerSigma(1, 1)).at_i([0.0])
    assert v.log_abs == 0 and abs(v.value - 1) < 1e-15


@given(st.floats(0.01, 30))
def test_product_reproduces_sinh(x):
    v = SINH.at_i([x], tol=1e-13)
    ref = weierstrass_sinh(x)
    assert abs(v.log_abs - float(mpmath.log(ref))) <= 1e-11


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_real_frequencies_give_modulus_at_least_one(a, b):
    Q = UltradiffSymbol(Fraction(3, 2), PowerSigma(LOG2 / 12, 0.5))
    assert Q.at_i([a, b]).log_abs >= -1e-14


def test_vectorized_log_matches_pointwise():
    Q = UltradiffSymbol(Fraction(3, 2), PowerSigma(LOG2 / 12, 0.5))
    xs = np.geomspace(0.1, 1e4, 25)
    vec = Q.log_abs_real(xs)
    for x, lv in zip(xs, vec):
        assert abs(lv - Q.at_i([x]).log_abs) <= 1e-9 * max(1.0, abs(lv))


def test_error_bound_is_honest():
    Q = UltradiffSymbol(Fraction(3, 2), PowerSigma(1, 0.5))
    fine = Q.at_i([40.0], tol=1e-14)
    rough = Q.at_i([40.0], tol=1e-6)
    assert abs(rough.log_abs - fine.log_abs) <= rough.rel_error_bound + fine.rel_error_bound


def test_truncation_budget():
    Q = UltradiffSymbol(1, TableSigma([1, 2], [1, 1 + 1e-9]), max_index=64)
    with pytest.raises(TruncationError):
        Q.at_i([1e3], tol=1e-15)


def test_order_below_one_is_rejected():
    with pytest.raises(ValueError):
        UltradiffSymbol(Fraction(1, 2), ConstSigma(1))


def test_weight_validation():
    with pytest.raises(SigmaError):
        TableSigma([1, 2, 3], [3, 2, 1])
    with pytest.raises(SigmaError):
        PowerSigma(1, 0)
    with pytest.raises(SigmaError):
        TableMajorant([0.5, 1.0], [2.0, 2.0])
    with pytest.raises(SigmaError):
        GrowthSigma(ExpMajorant(1, 1), 0.75)


def test_growth_weight_closed_form():
    sig = sigma_from_growth(ExpMajorant(1, 1), 0.5)
    rho = np.array([4.0, 100.0, 1e6])
    assert np.allclose(sig(rho), (LOG2 / 12) * np.sqrt(rho), rtol=1e-12)
    c, mu, R = sig.tail_power()
    assert abs(c - LOG2 / 12) < 1e-15 and mu == 0.5


@given(st.floats(0.05, 2), st.floats(1, 3), st.floats(0.1, 0.5))
def test_growth_weight_is_continuous_and_nondecreasing(c, k, mu):
    sig = sigma_from_growth(ExpMajorant(c, k), mu)
    rho = np.geomspace(1e-3, 1e8, 400)
    v = sig(rho)
    assert np.all(np.diff(v) >= -1e-12 * v[1:])
    a = sig.a
    below, above = sig(a ** (1 / mu) * (1 - 1e-9)), sig(a ** (1 / mu) * (1 + 1e-9))
    assert abs(below - above) <= 1e-6 * above


def test_growth_weight_is_sublinear_in_rho_over_weight():
    # rho / sigma(rho) is nondecreasing where the weight follows the majorant
    sig = sigma_from_growth(ExpMajorant(2, 2), 0.4)
    rho = np.geomspace(sig.a ** (1 / 0.4), 1e10, 300)
    r = rho / sig(rho)
    assert np.all(np.diff(r) >= 0)


def test_measure_growth_majorizes_samples():
    xi = np.arange(1, 4000, dtype=float)
    u = np.exp(-np.sqrt(xi))
    C = measure_growth(xi, u, 1.5)
    for e in (1e-3, 0.01, 0.3, 1.0):
        assert C(e) >= np.max(u * np.exp(-e * xi ** (1 / 1.5)))
    assert C.a > 0


def test_power_law_q_bound():
    Q = UltradiffSymbol(Fraction(3, 2), PowerSigma(LOG2 / 12, 0.5))
    rep = check_q_bound(Q, np.geomspace(1, 1e6, 200))
    assert rep.ok


def test_lower_bound_has_a_finite_onset():
    Q = UltradiffSymbol(Fraction(3, 2), PowerSigma(LOG2 / 12, 0.5))
    assert 1 <= lower_bound_onset(Q) < 100


def test_upper_bound_constants_are_finite_and_ordered():
    Q = UltradiffSymbol(Fraction(3, 2), PowerSigma(LOG2 / 12, 0.5))
    fit = upper_bound_fit(Q, np.geomspace(1, 1e5, 200), [0.5, 0.1, 0.01])
    assert all(math.isfinite(v) and v >= 0 for v in fit.values())
    assert fit[0.5] <= fit[0.1] <= fit[0.01]


def test_cone_lower_bound():
    Q = UltradiffSymbol(2, ConstSigma(1))
    rep = check_strong_ellipticity(Q, samples=300)
    assert rep.min_abs >= 1 and rep.factorwise_guarantee
    assert check_strong_ellipticity(constant_symbol(1), samples=50).min_abs == 1
    with pytest.raises(ValueError):
        check_strong_ellipticity(Q, lam=0.9)


def test_class_examples():
    s = Fraction(3, 2)
    fact2 = lambda k: mpmath.mpf(1) / mpmath.factorial(k) ** 2
    assert check_symbol_class(fact2, s, "roumieu", A=24).verdict == "consistent-with"
    fact_s = lambda k: mpmath.mpf(1) / mpmath.factorial(k) ** mpmath.mpf(1.5)
    assert check_symbol_class(fact_s, s, "roumieu", A=24).verdict == "violates"
    b = check_symbol_class(fact_s, s, "beurling", A=24)
    assert b.verdict == "consistent-with" and abs(float(b.constants["h"]) - 1) < 1e-9
    poly = {0: 1, 2: 3, 4: 1}
    assert check_symbol_class(poly, s, "roumieu").verdict == "consistent-with"
    assert check_symbol_class(poly, s, "beurling").verdict == "consistent-with"
    with pytest.raises(ValueError):
        check_symbol_class(poly, s, A=4)


def test_witness_for_slow_decay():
    w = build_witness(exp_decay(Fraction(2)), Fraction(3, 2), j_max=3)
    assert w is not None and w.ok
    assert w.M == sorted(set(w.M)) and w.N == sorted(set(w.N))
    v = check_symbol_class(w.coeffs, Fraction(3, 2), "roumieu", A=max(w.coeffs))
    assert v.verdict == "consistent-with"


def test_no_witness_for_analytic_decay():
    assert build_witness(exp_decay(1), Fraction(3, 2), j_max=2) is None


@pytest.mark.parametrize("text,kind", [("const 2", "const"), ("power 1/2 1/2", "power"),
                                       ("0.1*rho^1/2", "power"), ("table 1:1, 10:3", "table"),
                                       ("growth 1 1 1/2", "growth"), ("3", "const")])
def test_parse_sigma_forms(text, kind):
    sig = parse_sigma(text)
    assert sig.kind == kind
    back = sigma_from_dict(sig.to_dict())
    rho = np.array([0.5, 2.0, 50.0])
    assert np.allclose(back(rho), sig(rho), rtol=1e-12)


def test_parse_sigma_errors():
    with pytest.raises(SigmaError):
        parse_sigma("power x y")


def test_representation_exponent():
    assert representation_mu(Fraction(3, 2), 3) == 0.5
    assert abs(representation_mu(2, 3) - 1 / 3) < 1e-15
    with pytest.raises(ValueError):
        representation_mu(2, 2)
