import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypoel import spectral_lab as sl
from hypoel.ultradiff import LOG2, ConstSigma, PowerSigma, UltradiffSymbol, constant_symbol


def test_parseval_on_random_data():
    rng = np.random.default_rng(3)
    g = sl.GridFunction(rng.normal(size=1024), 2 * np.pi)
    assert sl.parseval_error(g) <= 1e-12
    g2 = sl.GridFunction(rng.normal(size=(64, 32)), 2 * np.pi)
    assert sl.parseval_error(g2) <= 1e-12


def test_fourier_coefficients_of_a_cosine():
    # grid on [-pi, pi): cos(3x) has coefficient 1/2 at xi = +-3
    g = sl.sample("cos(3*x)", 256, window=None)
    S = sl.transform(g)
    k = S.freqs[0]
    c = S.coeffs
    assert abs(c[k == 3][0] - 0.5) < 1e-13 and abs(c[k == -3][0] - 0.5) < 1e-13
    assert np.max(np.abs(c[np.abs(k) != 3])) < 1e-13


def test_synthesize_inverts_transform():
    g = sl.sample("x^2*sin(x)", 512)
    back = sl.synthesize(sl.transform(g))
    assert np.max(np.abs(back.samples - g.samples)) < 1e-13


def test_constant_sample():
    g = sl.sample(2.5, 64, window=None)
    assert np.all(g.samples == 2.5)


def test_singular_sample_inside_support():
    with pytest.raises(sl.SpectralError):
        sl.sample("1/x", 64)
    # a singularity outside the bump support is harmless
    g = sl.sample("1/(x - 3.1)", 64, window=3.0)
    assert np.all(np.isfinite(g.samples))


def test_bump_support_and_peak():
    x = np.linspace(-4, 4, 801)
    b = sl.gevrey_bump(x, 3.0)
    assert b[400] == 1.0
    assert np.all(b[np.abs(x) >= 3] == 0) and np.all(b[np.abs(x) < 3] > 0)


def test_grid_size_must_be_power_of_two():
    with pytest.raises(sl.SpectralError):
        sl.spectrum_from(lambda k: k, 100)


def test_multiply_then_divide_is_identity():
    Q = UltradiffSymbol(2, PowerSigma(LOG2 / 12, 0.5))
    S = sl.transform(sl.sample("exp(-x^2)", 1024))
    up = sl.multiplier_coeffs(S, Q, "multiply")
    back = sl.multiplier_coeffs(up, Q, "divide")
    rel = np.linalg.norm(back.coeffs - S.coeffs) / np.linalg.norm(S.coeffs)
    assert rel <= 1e-10


def test_unit_multiplier_is_identity():
    g = sl.sample("cos(x) + x", 512)
    out = sl.apply_multiplier(sl.transform(g), constant_symbol(1))
    assert np.max(np.abs(out.samples - g.samples)) <= 1e-12


def test_multiplier_argument_checks():
    S = sl.transform(sl.sample("x", 64))
    Q = constant_symbol(1)
    with pytest.raises(sl.SpectralError):
        sl.multiplier_coeffs(S, Q, "square")
    with pytest.raises(sl.SpectralError):
        sl.multiplier_coeffs(S, Q, delta=-1)


def test_multiply_overflow_is_reported():
    Q = UltradiffSymbol(1, ConstSigma(1e-4))
    S = sl.spectrum_from(lambda k: np.ones_like(k, dtype=float), 1024)
    with pytest.raises(sl.MultiplierError):
        sl.multiplier_coeffs(S, Q, "multiply")


def test_kernel_is_trivial():
    Q = UltradiffSymbol(2, PowerSigma(LOG2 / 12, 0.5))
    S = sl.spectrum_from(lambda a, b: np.zeros_like(a), (64, 64))
    k = sl.kernel_shadow(Q, S)
    assert k["Q_nonvanishing"] and k["solution_zero"] and k["min_log_abs_Q"] == 0
    assert k["lattice_points"] == 4096


@pytest.mark.parametrize("s", [1.5, 2.5])
def test_closed_form_decay_is_recovered(s):
    S = sl.spectrum_from(lambda k: np.exp(-np.abs(k) ** (1 / s)), 1 << 14)
    assert abs(sl.gevrey_order_fit(S).s_hat - s) <= 0.05


def test_band_limited_data_gives_the_sentinel():
    g = sl.sample("cos(2*x) + sin(5*x)", 1024, window=None)
    f = sl.gevrey_order_fit(sl.transform(g))
    assert f.sentinel and f.s_hat == 1


def test_analytic_decay_reports_order_one():
    S = sl.spectrum_from(lambda k: np.exp(-0.5 * np.abs(k)), 1 << 12)
    assert sl.gevrey_order_fit(S).s_hat <= 1.05


def test_slower_decay_dominates_a_sum():
    S = sl.spectrum_from(lambda k: np.exp(-np.abs(k) ** 0.5) + 1e-2 * np.exp(-np.abs(k) ** (2 / 3)), 1 << 16)
    assert abs(sl.gevrey_order_fit(S).s_hat - 2) <= 0.1


@settings(max_examples=10, deadline=None)
@given(st.floats(1e-6, 1e6))
def test_fit_is_scale_invariant(a):
    S = sl.spectrum_from(lambda k: np.exp(-np.abs(k) ** 0.5), 1 << 14)
    S2 = sl.spectrum_from(lambda k: a * np.exp(-np.abs(k) ** 0.5), 1 << 14)
    f1, f2 = sl.gevrey_order_fit(S), sl.gevrey_order_fit(S2)
    assert abs(f1.s_hat - f2.s_hat) <= 1e-6


def test_fit_needs_points():
    S = sl.spectrum_from(lambda k: np.exp(-np.abs(k) ** 0.5), 1 << 14)
    with pytest.raises(sl.FitError):
        sl.gevrey_order_fit(S, window=(100.0, 100.5))


def _aniso(tau, xi):
    return np.exp(-np.abs(tau) ** 0.5 - np.abs(xi))


def test_cone_split_separates_directions():
    S = sl.spectrum_from(_aniso, (1024, 1024))
    cs = sl.cone_split(S, 0.25)
    assert abs(cs.fit_A.s_hat - 1) <= 0.1
    assert abs(cs.fit_B.s_hat - 2) <= 0.1
    assert cs.points_A + cs.points_B == S.coeffs.size


@pytest.mark.parametrize("kappa", [0.25, 0.49])
def test_cone_split_of_radial_data_agrees(kappa):
    S = sl.spectrum_from(lambda a, b: np.exp(-np.sqrt(a * a + b * b) ** 0.5), (512, 512))
    cs = sl.cone_split(S, kappa)
    full = sl.gevrey_order_fit(S)
    assert abs(cs.fit_A.s_hat - full.s_hat) <= 0.1
    assert abs(cs.fit_B.s_hat - full.s_hat) <= 0.1


def test_cone_split_argument_checks():
    S = sl.spectrum_from(_aniso, (64, 64))
    with pytest.raises(sl.SpectralError):
        sl.cone_split(S, 0.0001)
    with pytest.raises(sl.SpectralError):
        sl.cone_split(S, 0.7)
    with pytest.raises(sl.SpectralError):
        sl.cone_split(sl.spectrum_from(lambda k: k, 64), 0.25)


def test_csv_layout():
    S = sl.transform(sl.sample("x", 16))
    lines = sl.spectrum_csv(S).splitlines()
    assert lines[0] == "xi,re,im,abs,log_abs"
    assert len(lines) == 17
    xs = [float(l.split(",")[0]) for l in lines[1:]]
    assert xs == sorted(xs)
    S2 = sl.spectrum_from(_aniso, (4, 8))
    assert sl.spectrum_csv(S2, limit=3).splitlines()[0].startswith("tau,xi,")


def test_csv_grid_roundtrip(tmp_path):
    p = tmp_path / "u.csv"
    p.write_text("# samples\n" + "\n".join(f"{i},{math.sin(i)}" for i in range(32)))
    g = sl.read_csv_grid(str(p))
    assert g.size == 32 and abs(g.samples[3] - math.sin(3)) < 1e-15


def test_thread_count_does_not_change_results(tmp_path):
    code = ("import numpy as np; from hypoel import spectral_lab as sl; "
            "S = sl.transform(sl.sample('exp(-1/x) for x>0', 4096)); "
            "print(repr(sl.gevrey_order_fit(S).s_hat)); print(repr(float(np.sum(np.abs(S.coeffs)))))")
    outs = []
    for n in ("1", "4"):
        env = dict(os.environ, HYPOEL_THREADS=n)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                   text=True, check=True).stdout)
    assert outs[0] == outs[1]


def test_representation_of_a_comb():
    u = sl.mollified_comb(2048)
    rep = sl.representation_experiment(u, 1.5, 3)
    assert rep.decreasing and rep.decay_violations == 0
    assert rep.mu == 0.5
    assert len(rep.errors) == 3 and all(e >= 0 for e in rep.errors)


def test_representation_of_a_gevrey_function():
    u = sl.sample("cos(x)", 2048, window_power=1)
    rep = sl.representation_experiment(u, 2, 4)
    assert rep.decreasing and rep.decay_violations == 0
    assert rep.fit is not None and rep.fit.s_hat <= 4 + 0.2


def test_representation_argument_checks():
    u = sl.sample("x", 256)
    with pytest.raises(sl.SpectralError):
        sl.representation_experiment(u, 2, 2)
    with pytest.raises(sl.SpectralError):
        sl.representation_experiment(u, 1, 2)
