"""Periodic FFT experiments on the Fourier side.

Estimating a Gevrey order from spectral decay, applying the product
symbols of :mod:`hypoel.ultradiff` as Fourier multipliers, the
factorization roundtrip ``u = Q f``, and the conic splitting of a 2-D
spectrum.

Conventions: a grid of ``n`` points per axis samples ``[-L/2, L/2)`` with
period ``L``; the angular frequencies are ``2 pi k / L``; coefficients are
``fft(u) / N`` so that ``u = sum_k c_k e^{i xi_k x}``.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.fft as sfft
import sympy

from .operator_core.coeff import CoeffExpr
from .ultradiff import (GrowthSigma, SeriesSymbol, UltradiffSymbol, measure_growth,
                        representation_mu)

EPS = np.finfo(float).eps
TINY = 1e-30


class SpectralError(ValueError):
    """Bad grid, window, or input for a spectral experiment."""


class FitError(SpectralError):
    """Too few usable frequencies for a decay fit."""


class MultiplierError(ArithmeticError):
    """A multiplier under- or overflowed on the lattice."""


def threads() -> int:
    try:
        return max(1, int(os.environ.get("HYPOEL_THREADS", "1")))
    except ValueError:
        return 1


def _pow2(n: int) -> bool:
    return n >= 2 and n & (n - 1) == 0


# ---------------------------------------------------------------- grids

@dataclass
class GridFunction:
    samples: np.ndarray
    period: Tuple[float, ...]
    spectrum: Optional["SpectralData"] = field(default=None, repr=False, compare=False)
    label: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if self.samples.ndim not in (1, 2):
            raise SpectralError("grids are 1-D or 2-D")
        if isinstance(self.period, (int, float)):
            self.period = (float(self.period),) * self.samples.ndim
        self.period = tuple(float(p) for p in self.period)
        if len(self.period) != self.samples.ndim:
            raise SpectralError("one period per axis")
        for n in self.samples.shape:
            if not _pow2(n):
                raise SpectralError(f"axis size {n} is not a power of two")

    @property
    def dim(self) -> int:
        return self.samples.ndim

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.samples.shape

    @property
    def size(self) -> int:
        return int(self.samples.size)

    @property
    def spacing(self) -> float:
        return min(p / n for p, n in zip(self.period, self.shape))

    def axes(self) -> List[np.ndarray]:
        return [-p / 2 + p * np.arange(n) / n for p, n in zip(self.period, self.shape)]

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2)))


@dataclass
class SpectralData:
    """Fourier coefficients on the frequency lattice of a grid."""

    freqs: Tuple[np.ndarray, ...]         # angular frequencies per axis, FFT order
    coeffs: np.ndarray                    # fft(u) / N
    period: Tuple[float, ...]
    source: str = ""
    window: Optional[Tuple[float, float]] = None
    scale: Optional[float] = None          # normalization inherited from a parent spectrum

    @property
    def dim(self) -> int:
        return self.coeffs.ndim

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.coeffs.shape

    def mesh(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.freqs, indexing="ij"))

    def radius(self) -> np.ndarray:
        m = self.mesh()
        return np.sqrt(sum(a * a for a in m))

    def abs(self) -> np.ndarray:
        return np.abs(self.coeffs)

    def masked(self, mask: np.ndarray, source: str) -> "SpectralData":
        scale = self.scale if self.scale is not None else float(np.max(self.abs()))
        return SpectralData(self.freqs, np.where(mask, self.coeffs, 0), self.period, source, self.window, scale)


def _fft_freqs(shape, period) -> Tuple[np.ndarray, ...]:
    return tuple(2 * np.pi * sfft.fftfreq(n, d=1.0 / n) / p for n, p in zip(shape, period))


def _phase(shape, period) -> np.ndarray:
    """exp(-i xi x_0) correction for grids starting at -L/2."""
    ph = 1.0
    for ax, (n, p) in enumerate(zip(shape, period)):
        k = sfft.fftfreq(n, d=1.0 / n)
        v = np.exp(1j * np.pi * k)          # x_0 = -p/2
        sh = [1] * len(shape)
        sh[ax] = n
        ph = ph * v.reshape(sh)
    return ph


def transform(g: GridFunction) -> SpectralData:
    if g.spectrum is not None:
        return g.spectrum
    raw = sfft.fftn(g.samples, workers=threads())
    c = raw * _phase(g.shape, g.period) / g.size
    return SpectralData(_fft_freqs(g.shape, g.period), c, g.period, g.label or "grid")


def synthesize(S: SpectralData, real: bool = True, label: str = "") -> GridFunction:
    N = int(np.prod(S.shape))
    vals = sfft.ifftn(S.coeffs * N / _phase(S.shape, S.period), workers=threads())
    if real:
        vals = vals.real
    return GridFunction(vals, S.period, spectrum=S, label=label or S.source)


def spectrum_from(fn: Callable, shape: Union[int, Sequence[int]], period=2 * np.pi,
                  source: str = "synthetic") -> SpectralData:
    """Coefficients c(xi) given directly as a function of the frequency mesh."""
    shape = (shape,) if isinstance(shape, int) else tuple(shape)
    for n in shape:
        if not _pow2(n):
            raise SpectralError(f"axis size {n} is not a power of two")
    per = (float(period),) * len(shape) if np.ndim(period) == 0 else tuple(period)
    freqs = _fft_freqs(shape, per)
    mesh = np.meshgrid(*freqs, indexing="ij")
    c = np.asarray(fn(*mesh), dtype=complex)
    return SpectralData(freqs, np.broadcast_to(c, shape).copy(), per, source)


def parseval_error(g: GridFunction, S: Optional[SpectralData] = None) -> float:
    """Relative gap between ||u||^2 and (1/N) ||fft u||^2."""
    S = transform(g) if S is None else S
    lhs = float(np.sum(np.abs(g.samples) ** 2))
    raw2 = float(np.sum(np.abs(S.coeffs) ** 2)) * g.size ** 2
    rhs = raw2 / g.size
    if lhs == 0:
        return abs(rhs)
    return abs(lhs - rhs) / lhs


# ---------------------------------------------------------------- sampling

def gevrey_bump(x: np.ndarray, R: float = 3.0, a: float = 1.0) -> np.ndarray:
    """exp(-1/(1-(x/R)^2)^a) scaled to 1 at the origin; zero for |x| >= R."""
    r2 = np.asarray(x, dtype=float) / R
    r2 = r2 * r2
    out = np.zeros_like(r2)
    m = r2 < 1
    out[m] = np.exp(1.0 - 1.0 / (1.0 - r2[m]) ** a)
    return out


def _split_piecewise(text: str) -> Tuple[str, Optional[str]]:
    t = text.strip()
    for sep in (" else", ",else", ", 0 else"):
        if t.endswith(sep):
            t = t[: -len(sep)].rstrip(", ")
    if " for " in t:
        e, c = t.split(" for ", 1)
        return e.strip(), c.strip()
    return t, None


def closed_form(text: str, dim: int = 1) -> Callable:
    """Numeric callable from text such as ``exp(-1/x) for x>0`` (zero off the condition).

    1-D expressions use ``x``; 2-D expressions use ``t`` and ``x``.
    """
    names = ("x",) if dim == 1 else ("t", "x")
    syms = sympy.symbols(names, real=True)
    loc = dict(zip(names, syms))
    e_txt, c_txt = _split_piecewise(text)
    try:
        expr = sympy.sympify(e_txt, locals=loc)
        cond = sympy.sympify(c_txt, locals=loc) if c_txt else None
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise SpectralError(f"cannot parse {text!r}") from exc
    extra = (expr.free_symbols | (cond.free_symbols if cond is not None else set())) - set(syms)
    if extra:
        raise SpectralError(f"unknown symbols {sorted(map(str, extra))}")
    f = sympy.lambdify(syms, expr, "numpy")
    g = sympy.lambdify(syms, cond, "numpy") if cond is not None else None

    def fn(*xs):
        with np.errstate(all="ignore"):
            base = np.broadcast_to(np.asarray(f(*xs), dtype=complex), np.broadcast(*xs).shape)
            if g is None:
                return base
            m = np.broadcast_to(np.asarray(g(*xs), dtype=bool), base.shape)
            return np.where(m, base, 0)
    return fn


def sample(expr, n: Union[int, Sequence[int]], period=2 * np.pi, window: Optional[float] = 3.0,
           window_power: float = 1.0, label: str = "") -> GridFunction:
    """Windowed periodic samples of ``expr``.

    ``expr`` is a number, a callable on the coordinate mesh, a closed-form
    string, or a :class:`CoeffExpr` in the variables ``x`` (and ``t``).
    ``window`` is the bump radius R; ``None`` keeps the raw samples.
    """
    shape = (n,) if isinstance(n, int) else tuple(n)
    dim = len(shape)
    g0 = GridFunction(np.zeros(shape), period)
    mesh = np.meshgrid(*g0.axes(), indexing="ij")
    if isinstance(expr, (int, float, complex)):
        vals = np.full(shape, expr, dtype=complex)
        label = label or f"const {expr}"
    elif isinstance(expr, str):
        vals = closed_form(expr, dim)(*mesh)
        label = label or expr
    elif isinstance(expr, CoeffExpr):
        names = ("x",) if dim == 1 else ("t", "x")
        syms = [sympy.Symbol(v, real=True) for v in names]
        e = expr.to_sympy().subs({sympy.Symbol(v): s for v, s in zip(names, syms)})
        with np.errstate(all="ignore"):
            vals = np.asarray(sympy.lambdify(syms, e, "numpy")(*mesh), dtype=complex)
        vals = np.broadcast_to(vals, shape)
        label = label or str(e)
    elif callable(expr):
        with np.errstate(all="ignore"):
            vals = np.asarray(expr(*mesh), dtype=complex)
        vals = np.broadcast_to(vals, shape)
        label = label or getattr(expr, "__name__", "callable")
    else:
        raise SpectralError(f"cannot sample {type(expr).__name__}")
    if window is not None:
        w = np.ones(shape)
        for m in mesh:
            w = w * gevrey_bump(m, window, window_power)
        support = w > 0
    else:
        w = 1.0
        support = np.ones(shape, dtype=bool)
    bad = ~np.isfinite(vals) & support
    if np.any(bad):
        where = [float(m[bad][0]) for m in mesh]
        raise SpectralError(f"singular sample inside the window support at {where}")
    vals = np.where(support, vals, 0) * w
    if np.all(np.abs(vals.imag) <= 1e-15 * max(1.0, float(np.max(np.abs(vals.real), initial=0)))):
        vals = vals.real
    return GridFunction(np.ascontiguousarray(vals), period, label=label)


def square_wave(n: int, period: float = 2 * np.pi, window: Optional[float] = 3.0) -> GridFunction:
    """Derivative of the triangle wave, a jump function of distribution order zero."""
    return sample(lambda x: np.sign(np.sin(2 * np.pi * x / period)), n, period, window,
                  label="triangle-wave derivative")


def mollified_comb(n: int, period: float = 2 * np.pi, teeth: int = 8, width: float = 0.02,
                   window: Optional[float] = 3.0) -> GridFunction:
    """Sum of narrow Gaussians at ``teeth`` equispaced points."""
    centers = -period / 2 + period * (np.arange(teeth) + 0.5) / teeth

    def f(x):
        return sum(np.exp(-((x - c) / width) ** 2 / 2) for c in centers) / (width * math.sqrt(2 * math.pi))
    return sample(f, n, period, window, label="mollified comb")


# ---------------------------------------------------------------- decay fits

@dataclass
class GevreyFit:
    s_hat: float
    c: float
    C: float
    window: Tuple[float, float]
    residual: float
    points: int
    sentinel: bool = False
    normalization: float = 1.0

    def to_dict(self) -> dict:
        return {"s_hat": repr(self.s_hat), "c": repr(self.c), "C": repr(self.C),
                "window": [repr(self.window[0]), repr(self.window[1])],
                "residual": repr(self.residual), "points": self.points,
                "analytic_or_better": self.sentinel}


def default_window(S: SpectralData) -> Tuple[float, float]:
    n = max(S.shape)
    return (n ** 0.25, n ** 0.5)


def envelope(S: SpectralData) -> Tuple[np.ndarray, np.ndarray]:
    """Per integer radius shell: the largest |c| and the radius where it sits."""
    r = S.radius().ravel()
    a = S.abs().ravel()
    step = min(2 * np.pi / p for p in S.period)
    shell = np.rint(r / step).astype(np.int64)
    order = np.lexsort((-a, shell))
    sh = shell[order]
    first = np.ones(len(sh), dtype=bool)
    first[1:] = sh[1:] != sh[:-1]
    idx = order[first]
    return r[idx], a[idx]


def gevrey_order_fit(S: SpectralData, window: Optional[Tuple[float, float]] = None,
                     noise: Optional[float] = None, min_points: int = 4) -> GevreyFit:
    """Fit |c(xi)| <= C exp(-c |xi|^{1/s}) from the double-log regression.

    The normalization is the largest |c| over |xi| <= window top (or the
    parent's maximum for a masked part of a spectrum); shells
    whose envelope is below ``noise`` (default 50 eps max|c|, never below
    1e-30) are dropped.  If every shell in the window dropped out while the
    low band is populated, the input decays faster than the grid can
    resolve and the analytic sentinel ``s_hat = 1`` is reported.
    """
    lo, hi = window if window is not None else default_window(S)
    if not 0 < lo < hi:
        raise FitError("empty regression window")
    r, a = envelope(S)
    top = float(np.max(a[r <= hi], initial=0.0))
    if S.scale is not None:
        top = max(top, S.scale)
    if top == 0:
        raise FitError("no signal below the window top")
    floor = max(TINY, 50 * EPS * float(np.max(a))) if noise is None else max(TINY, noise)
    inwin = (r >= lo) & (r <= hi)
    if np.count_nonzero(inwin) < min_points:
        raise FitError(f"only {np.count_nonzero(inwin)} lattice shells inside the window")
    use = inwin & (a > floor) & (a < top)
    if np.count_nonzero(use) < min_points:
        if np.count_nonzero(inwin & (a <= floor)) >= np.count_nonzero(inwin) // 2:
            return GevreyFit(1.0, math.inf, top, (lo, hi), 0.0, int(np.count_nonzero(use)), True, top)
        raise FitError("too few usable frequencies in the window")
    x = np.log(r[use])
    z = np.log(-np.log(a[use] / top))
    slope, icpt = np.polyfit(x, z, 1)
    res = float(np.sqrt(np.mean((z - (slope * x + icpt)) ** 2)))
    if not slope > 0:
        raise FitError("spectrum does not decay in the window")
    s_hat = 1.0 / slope
    c = math.exp(icpt)
    sentinel = s_hat <= 1.0
    # least C with the bound holding at every shell in the window
    C = float(np.max(a[inwin] * np.exp(c * r[inwin] ** slope)))
    if sentinel:
        s_hat = 1.0
    return GevreyFit(float(s_hat), c, C, (lo, hi), res, int(np.count_nonzero(use)), sentinel, top)


# ---------------------------------------------------------------- multipliers

Symbol = Union[UltradiffSymbol, SeriesSymbol]


def symbol_log_abs(Q: Symbol, S: SpectralData, tol: float = 1e-12) -> np.ndarray:
    """log |Q(i xi)| on the lattice; radial, so each distinct |xi| is evaluated once."""
    r = S.radius()
    key = np.round(r * r, 9)
    uniq, inv = np.unique(key.ravel(), return_inverse=True)
    if isinstance(Q, UltradiffSymbol):
        vals = Q.log_abs_real(np.sqrt(uniq), tol)
    else:
        vals = np.array([Q.at_i([math.sqrt(w)], tol).log_abs for w in uniq])
    return vals[inv].reshape(r.shape)


def multiplier_coeffs(S: SpectralData, Q: Symbol, mode: str = "divide", delta: float = 0.0,
                      guard: float = 1e-12, logQ: Optional[np.ndarray] = None) -> SpectralData:
    if mode not in ("multiply", "divide"):
        raise SpectralError("mode is 'multiply' or 'divide'")
    if delta < 0:
        raise SpectralError("delta must be nonnegative")
    lq = symbol_log_abs(Q, S) if logQ is None else logQ
    if mode == "divide" and np.min(lq) < math.log(guard):
        raise MultiplierError(f"|Q(i xi)| drops below the guard {guard:g} on the lattice")
    sign = 1.0 if mode == "multiply" else -1.0
    r2 = S.radius() ** 2
    a = S.abs()
    nz = a > 0
    with np.errstate(divide="ignore"):
        la = np.where(nz, np.log(np.where(nz, a, 1.0)), -np.inf)
    lg = la + sign * lq - delta * r2
    if np.any(lg[nz] > 700):
        raise MultiplierError("multiplied coefficients overflow double range")
    phase = np.where(nz, S.coeffs / np.where(nz, a, 1.0), 0)
    c = np.where(nz, phase * np.exp(np.where(nz, lg, 0.0)), 0)
    tag = f"{mode}[delta={delta:g}]({S.source})"
    return SpectralData(S.freqs, c, S.period, tag, S.window)


def apply_multiplier(S: SpectralData, Q: Symbol, mode: str = "divide", delta: float = 0.0,
                     guard: float = 1e-12, real: Optional[bool] = None) -> GridFunction:
    """Inverse FFT of c(xi) Q(i xi)^{+-1} e^{-delta |xi|^2}.

    The result keeps its exact spectrum, so a following transform does not
    reintroduce rounding noise at frequencies where Q is huge.
    """
    out = multiplier_coeffs(S, Q, mode, delta, guard)
    if real is None:
        real = _hermitian(S.coeffs)
    return synthesize(out, real=real, label=out.source)


def _hermitian(c: np.ndarray) -> bool:
    flipped = c
    for ax in range(c.ndim):
        flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
    return bool(np.allclose(c, np.conj(flipped), rtol=0, atol=1e-14 * max(1.0, float(np.max(np.abs(c))))))


def kernel_shadow(Q: Symbol, S: SpectralData) -> Dict[str, object]:
    """Solve Q(i xi) v(xi) = 0 on the lattice: Q(i xi) >= 1 there, so v = 0."""
    lq = symbol_log_abs(Q, S)
    nonzero = lq > -math.inf
    v = np.zeros(S.shape, dtype=complex)
    return {"min_log_abs_Q": float(np.min(lq)), "Q_nonvanishing": bool(np.all(nonzero)),
            "solution_zero": bool(np.all(v == 0)) and bool(np.all(nonzero)), "lattice_points": int(v.size)}


# ---------------------------------------------------------------- representation

@dataclass
class RepresentationReport:
    s: float
    t: float
    mu: float
    deltas: List[float]
    errors: List[float]
    decreasing: bool
    fit: Optional[GevreyFit]
    decay_C: float
    decay_violations: int
    tol: float
    sigma: Dict[str, object]
    symbol: Optional[Symbol] = field(default=None, repr=False)
    f: Optional[GridFunction] = field(default=None, repr=False)

    @property
    def roundtrip_ok(self) -> bool:
        return self.errors[-1] <= self.tol and self.decreasing

    @property
    def ok(self) -> bool:
        fit_ok = self.fit is not None and self.fit.s_hat <= self.t + 0.2
        return self.roundtrip_ok and self.decay_violations == 0 and fit_ok

    def to_dict(self) -> dict:
        return {"s": repr(self.s), "t": repr(self.t), "mu": repr(self.mu),
                "deltas": [repr(d) for d in self.deltas], "l2_errors": [repr(e) for e in self.errors],
                "decreasing": self.decreasing, "tolerance": repr(self.tol),
                "f_fit": None if self.fit is None else self.fit.to_dict(),
                "decay": {"C": repr(self.decay_C), "violations": self.decay_violations},
                "sigma": self.sigma, "ok": self.ok}


def representation_experiment(u: GridFunction, s, t, deltas: Optional[Sequence[float]] = None,
                              tol: float = 1e-6, eps_grid: Optional[Sequence[float]] = None) -> RepresentationReport:
    """Factor u = Q f with Q of Gevrey type s and f of Gevrey order about t.

    Stages: measure C(eps) from |c(xi)|; sigma from the growth majorant with
    mu = min{1/2, 1 - s/t}; divide with the mollifier ladder; compare
    Q f_delta with u in L^2; fit the order of f; test the pointwise bound
    |c/Q| <= C exp(-|xi|^{1/t}) with C fitted on the low band |xi| <= N^{1/4}.
    """
    s, t = float(s), float(t)
    if not t > s > 1:
        raise SpectralError("need t > s > 1")
    S = transform(u)
    mu = representation_mu(s, t)
    r = S.radius()
    C = measure_growth(r.ravel(), S.abs().ravel(), s, eps_grid)
    sigma = GrowthSigma(C, mu)
    Q = UltradiffSymbol(s, sigma)
    lq = symbol_log_abs(Q, S)
    h = u.spacing
    ladder = [float(d) for d in (deltas if deltas is not None else (1e-2 * h * h, 1e-3 * h * h, 1e-4 * h * h))]
    un = float(np.sqrt(np.sum(np.abs(S.coeffs) ** 2)))
    errors = []
    f = None
    for d in ladder:
        fs = multiplier_coeffs(S, Q, "divide", d, logQ=lq)
        back = multiplier_coeffs(fs, Q, "multiply", 0.0, logQ=lq)
        # the L^2 norm of a grid function is proportional to that of its coefficients
        errors.append(float(np.sqrt(np.sum(np.abs(back.coeffs - S.coeffs) ** 2))) / un)
        f = fs
    decreasing = all(b < a for a, b in zip(errors, errors[1:]))
    f0 = multiplier_coeffs(S, Q, "divide", 0.0, logQ=lq)
    try:
        fit = gevrey_order_fit(f0)
    except FitError:
        fit = None
    a = f0.abs()
    with np.errstate(divide="ignore"):
        la = np.log(a)
    bound = la + r ** (1.0 / t)
    low = r <= max(f0.shape) ** 0.25
    logC = float(np.max(bound[low]))
    viol = int(np.count_nonzero(bound > logC + 1e-12 * max(1.0, abs(logC))))
    return RepresentationReport(s, t, mu, ladder, errors, decreasing, fit, math.exp(logC), viol, tol,
                                Q.to_dict(), Q, synthesize(f, real=_hermitian(S.coeffs)))


# ---------------------------------------------------------------- cones

@dataclass
class ConeSplit:
    kappa: float
    A: SpectralData
    B: SpectralData
    fit_A: GevreyFit
    fit_B: GevreyFit
    points_A: int
    points_B: int

    def to_dict(self) -> dict:
        return {"kappa": repr(self.kappa), "A": {"points": self.points_A, "fit": self.fit_A.to_dict()},
                "B": {"points": self.points_B, "fit": self.fit_B.to_dict()}}


def cone_split(S: SpectralData, kappa: float, window: Optional[Tuple[float, float]] = None) -> ConeSplit:
    """A = {|tau| <= kappa |xi|}, B the rest; axis 0 is tau, axis 1 is xi."""
    if S.dim != 2:
        raise SpectralError("cone splitting needs 2-D data")
    if not 0 < kappa < 0.5 + 1e-12:
        raise SpectralError("kappa must lie in (0, 1/2)")
    tau, xi = S.mesh()
    A = np.abs(tau) <= kappa * np.abs(xi)
    win = window if window is not None else default_window(S)
    r = S.radius()
    band = (r >= win[0]) & (r <= win[1])
    # the A-cone must hold lattice points off the xi-axis inside the window
    if np.count_nonzero(A & band & (tau != 0)) < 4:
        raise SpectralError(f"kappa = {kappa:g} leaves the A-cone degenerate on this lattice")
    SA = S.masked(A, f"A[{kappa:g}]({S.source})")
    SB = S.masked(~A, f"B[{kappa:g}]({S.source})")
    return ConeSplit(kappa, SA, SB, gevrey_order_fit(SA, win), gevrey_order_fit(SB, win),
                     int(np.count_nonzero(A)), int(np.count_nonzero(~A)))


# ---------------------------------------------------------------- CSV

def spectrum_csv(S: SpectralData, limit: Optional[int] = None) -> str:
    """Columns xi (or tau, xi), re, im, abs, log_abs in ascending frequency order."""
    buf = io.StringIO()
    head = ["xi"] if S.dim == 1 else ["tau", "xi"]
    buf.write(",".join(head + ["re", "im", "abs", "log_abs"]) + "\n")
    mesh = [sfft.fftshift(m) for m in S.mesh()]
    c = sfft.fftshift(S.coeffs)
    rows = 0
    for idx in np.ndindex(c.shape):
        v = complex(c[idx])
        a = abs(v)
        la = math.log(a) if a > 0 else -math.inf
        buf.write(",".join([repr(float(m[idx])) for m in mesh]
                           + [repr(v.real), repr(v.imag), repr(a), repr(la)]) + "\n")
        rows += 1
        if limit is not None and rows >= limit:
            break
    return buf.getvalue()


def read_csv_grid(path: str, period: float = 2 * np.pi) -> GridFunction:
    """Samples from a CSV file: one value per line, or ``x,value`` pairs."""
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line[0] == "#":
                continue
            parts = line.split(",")
            try:
                vals.append(float(parts[-1]))
            except ValueError:
                if vals:
                    raise SpectralError(f"bad CSV row {line!r}")
    return GridFunction(np.asarray(vals), period, label=os.path.basename(path))
