"""Infinite order operators of Gevrey type.

The central object is the product symbol

    Q(zeta) = prod_{p >= 1} (1 - <zeta>^2 / (p^{2s} sigma(p))),   <zeta>^2 = sum zeta_k^2,

built from a nondecreasing weight ``sigma``.  On the real axis
``Q(i xi) = prod (1 + |xi|^2 / (p^{2s} sigma(p))) >= 1``.  The module also
covers coefficient class tests, growth majorants of an ultradistribution,
the weight they induce, and the search for sequences that turn a smooth
non-Gevrey function into a non-distribution.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

LOG2 = math.log(2.0)
MAX_INDEX = 10 ** 6
WITNESS_PREC = 256


class SigmaError(ValueError):
    """A weight or majorant violates its monotonicity requirements."""


class TruncationError(ArithmeticError):
    """The product could not be truncated within the index budget."""


def _num(x) -> float:
    return float(Fraction(x)) if isinstance(x, (str, Fraction)) else float(x)


# ---------------------------------------------------------------- weights

class SigmaFunction:
    """Nondecreasing weight sigma: (0, inf) -> (0, inf)."""

    kind = "abstract"
    divergent = True

    def __call__(self, rho):
        raise NotImplementedError

    def tail_power(self) -> Optional[Tuple[float, float, float]]:
        """``(c, mu, R)`` when sigma(rho) = c rho^mu exactly for rho >= R."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError

    def text(self) -> str:
        raise NotImplementedError


class ConstSigma(SigmaFunction):
    kind = "const"
    divergent = False

    def __init__(self, c):
        self.c = _num(c)
        if not self.c > 0:
            raise SigmaError("a constant weight must be positive")

    def __call__(self, rho):
        return np.full_like(np.asarray(rho, dtype=float), self.c) if np.ndim(rho) else self.c

    def tail_power(self):
        return (self.c, 0.0, 0.0)

    def to_dict(self):
        return {"kind": "const", "c": repr(self.c)}

    def text(self):
        return f"const {self.c:g}"


class PowerSigma(SigmaFunction):
    """sigma(rho) = c rho^mu with mu > 0."""

    kind = "power"

    def __init__(self, c, mu):
        self.c, self.mu = _num(c), _num(mu)
        if not (self.c > 0 and self.mu > 0):
            raise SigmaError("power weight needs c > 0 and mu > 0")

    def __call__(self, rho):
        return self.c * np.power(rho, self.mu)

    def tail_power(self):
        return (self.c, self.mu, 0.0)

    def to_dict(self):
        return {"kind": "power", "c": repr(self.c), "mu": repr(self.mu)}

    def text(self):
        return f"{self.c:.12g}*rho^{self.mu:g}"


class TableSigma(SigmaFunction):
    """Piecewise-linear in (log rho, log sigma); constant to the left, power law to the right."""

    kind = "table"

    def __init__(self, rho: Sequence, values: Sequence):
        r = np.asarray([_num(x) for x in rho], dtype=float)
        v = np.asarray([_num(x) for x in values], dtype=float)
        if len(r) < 2 or len(r) != len(v):
            raise SigmaError("a weight table needs at least two (rho, sigma) pairs")
        if np.any(r <= 0) or np.any(v <= 0):
            raise SigmaError("weight tables take positive abscissae and values")
        if np.any(np.diff(r) <= 0):
            raise SigmaError("table abscissae must increase")
        if np.any(np.diff(v) < 0):
            raise SigmaError("weight table decreases")
        self.lr, self.lv = np.log(r), np.log(v)
        self.slope = (self.lv[-1] - self.lv[-2]) / (self.lr[-1] - self.lr[-2])
        if not self.slope > 0:
            raise SigmaError("weight table must end increasing so that sigma diverges")

    def __call__(self, rho):
        lr = np.log(np.asarray(rho, dtype=float))
        out = np.interp(lr, self.lr, self.lv)
        out = np.where(lr > self.lr[-1], self.lv[-1] + self.slope * (lr - self.lr[-1]), out)
        res = np.exp(out)
        return res if np.ndim(rho) else float(res)

    def tail_power(self):
        c = math.exp(self.lv[-1] - self.slope * self.lr[-1])
        return (c, float(self.slope), math.exp(self.lr[-1]))

    def to_dict(self):
        return {"kind": "table", "rho": [repr(float(x)) for x in np.exp(self.lr)],
                "sigma": [repr(float(x)) for x in np.exp(self.lv)]}

    def text(self):
        return "table(" + ", ".join(f"{a:g}:{b:g}" for a, b in zip(np.exp(self.lr), np.exp(self.lv))) + ")"


# ---------------------------------------------------------------- growth majorants

class GrowthMajorant:
    """A continuous strictly decreasing C(eps) with C > 1 on (0, 1] and C -> inf at 0."""

    kind = "abstract"

    def log_c(self, eps):
        raise NotImplementedError

    def __call__(self, eps):
        return np.exp(self.log_c(eps))

    @property
    def a(self) -> float:
        return float(self.log_c(1.0))

    def gamma(self, y):
        """Inverse of log C on [a, inf)."""
        raise NotImplementedError

    def gamma_tail(self) -> Optional[Tuple[float, float]]:
        """``(K, Y)`` when gamma(y) = K / y exactly for y >= Y."""
        return None


class ExpMajorant(GrowthMajorant):
    """C(eps) = exp(c / eps^k)."""

    kind = "exp"

    def __init__(self, c=1, k=1):
        self.c, self.k = _num(c), _num(k)
        if not (self.c > 0 and self.k > 0):
            raise SigmaError("exp majorant needs c > 0 and k > 0")

    def log_c(self, eps):
        return self.c * np.power(eps, -self.k)

    def gamma(self, y):
        return np.power(self.c / np.asarray(y, dtype=float), 1.0 / self.k)

    def gamma_tail(self):
        return (self.c, self.c) if self.k == 1 else None

    def to_dict(self):
        return {"kind": "exp", "c": repr(self.c), "k": repr(self.k)}

    def text(self):
        return f"exp({self.c:g}/eps^{self.k:g})"


class TableMajorant(GrowthMajorant):
    """Monotone piecewise-linear in (log eps, log C), hyperbolic in log C beyond the knots."""

    kind = "table"

    def __init__(self, eps: Sequence, c_values: Sequence):
        e = np.asarray([_num(x) for x in eps], dtype=float)
        c = np.asarray([_num(x) for x in c_values], dtype=float)
        order = np.argsort(e)
        e, c = e[order], c[order]
        if len(e) < 2:
            raise SigmaError("a majorant table needs at least two points")
        if np.any(e <= 0) or np.any(np.diff(e) <= 0):
            raise SigmaError("majorant abscissae must be positive and distinct")
        if np.any(np.diff(c) >= 0):
            raise SigmaError("a growth majorant must be strictly decreasing")
        if np.any(c <= 1):
            raise SigmaError("majorant values must exceed 1")
        if e[-1] < 1:
            raise SigmaError("majorant table must reach eps = 1")
        self.le = np.log(e)
        self.lc = np.log(c)         # log C, positive

    def log_c(self, eps):
        le = np.log(np.asarray(eps, dtype=float))
        lc = np.exp(np.interp(le, self.le, np.log(self.lc)))
        lo, hi = self.le[0], self.le[-1]
        lc = np.where(le < lo, self.lc[0] * np.exp(lo - le), lc)
        lc = np.where(le > hi, self.lc[-1] * np.exp(hi - le), lc)
        return lc if np.ndim(eps) else float(lc)

    def gamma(self, y):
        y = np.asarray(y, dtype=float)
        ly = np.log(y)
        # log log C is decreasing in log eps: interpolate the reversed table
        xs, ys = np.log(self.lc)[::-1], self.le[::-1]
        le = np.interp(ly, xs, ys)
        K0 = self.lc[0] * math.exp(self.le[0])
        K1 = self.lc[-1] * math.exp(self.le[-1])
        out = np.exp(le)
        out = np.where(y > self.lc[0], K0 / y, out)
        out = np.where(y < self.lc[-1], K1 / y, out)
        return out if out.ndim else float(out)

    def gamma_tail(self):
        return (float(self.lc[0] * math.exp(self.le[0])), float(self.lc[0]))

    def to_dict(self):
        return {"kind": "table", "eps": [repr(float(x)) for x in np.exp(self.le)],
                "C": [repr(float(x)) for x in np.exp(self.lc)]}

    def text(self):
        return f"table({len(self.le)} points)"


def measure_growth(freqs: np.ndarray, abs_coeffs: np.ndarray, s: float,
                   eps_grid: Optional[Sequence[float]] = None, floor: float = 1e-3) -> TableMajorant:
    """Least majorant C(eps) >= max |u(xi)| e^{-eps |xi|^{1/s}}, made strictly decreasing.

    The measured values are raised to a running maximum (so they decrease
    in eps), floored above 1, and given a small strict slope.
    """
    eps_grid = np.asarray(eps_grid if eps_grid is not None else np.geomspace(1e-3, 2.0, 40), dtype=float)
    eps_grid = np.sort(eps_grid)
    r = np.power(np.abs(np.asarray(freqs, dtype=float)), 1.0 / s)
    la = np.log(np.maximum(np.asarray(abs_coeffs, dtype=float), 1e-300))
    meas = np.array([np.max(la - e * r) for e in eps_grid])
    # decreasing in eps after a running max from the right
    meas = np.maximum.accumulate(meas[::-1])[::-1]
    logc = np.maximum(meas, 0.0) + floor * (1.0 + 1.0 / eps_grid)
    if eps_grid[-1] < 1:
        raise SigmaError("eps grid must reach 1")
    return TableMajorant(eps_grid, np.exp(logc))


class GrowthSigma(SigmaFunction):
    """Weight induced by a growth majorant:

    sigma(rho) = (log 2 / 6) / (rho^{-mu} + gamma(rho^mu))  for rho^mu >= a,
    and the value at rho^mu = a below that.
    """

    kind = "growth"

    def __init__(self, majorant: GrowthMajorant, mu):
        self.C, self.mu = majorant, _num(mu)
        if not 0 < self.mu <= 0.5:
            raise SigmaError("mu must lie in (0, 1/2]")
        self.a = majorant.a
        if not self.a > 0:
            raise SigmaError("log C(1) must be positive")
        self.floor = (LOG2 / 6) / (1.0 / self.a + 1.0)

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        y = np.power(rho, self.mu)
        yy = np.maximum(y, self.a)
        val = (LOG2 / 6) / (np.power(yy, -1.0) + self.C.gamma(yy))
        out = np.where(y >= self.a, val, self.floor)
        return out if out.ndim else float(out)

    def tail_power(self):
        t = self.C.gamma_tail()
        if t is None:
            return None
        K, Y = t
        R = max(Y, self.a) ** (1.0 / self.mu)
        return ((LOG2 / 6) / (1.0 + K), self.mu, R)

    def to_dict(self):
        d = {"kind": "growth", "mu": repr(self.mu), "a": repr(self.a), "majorant": self.C.to_dict()}
        tp = self.tail_power()
        if tp is not None:
            d["closed_form"] = f"{tp[0]!r}*rho^{tp[1]!r} for rho >= {tp[2]!r}"
        return d

    def text(self):
        return f"growth[{self.C.text()}, mu={self.mu:g}]"


def sigma_from_growth(C: GrowthMajorant, mu) -> GrowthSigma:
    return GrowthSigma(C, mu)


def representation_mu(s, t) -> float:
    """The exponent choice min{1/2, 1 - s/t} for t > s."""
    s, t = _num(s), _num(t)
    if not t > s:
        raise ValueError("need t > s")
    return min(0.5, 1.0 - s / t)


def parse_sigma(text: str) -> SigmaFunction:
    """``const c``, ``c*rho^mu``, ``power c mu``, ``table r:v, r:v, ...`` or ``growth c k mu``."""
    t = text.strip()
    low = t.lower()
    try:
        if low.startswith("const"):
            return ConstSigma(Fraction(t[5:].strip() or "1"))
        if low.startswith("power"):
            c, mu = t[5:].split()
            return PowerSigma(Fraction(c), Fraction(mu))
        if low.startswith("table"):
            body = t[5:].strip().strip("()")
            pairs = [p.split(":") for p in body.split(",") if p.strip()]
            return TableSigma([Fraction(a) for a, _ in pairs], [Fraction(b) for _, b in pairs])
        if low.startswith("growth"):
            c, k, mu = t[6:].split()
            return GrowthSigma(ExpMajorant(Fraction(c), Fraction(k)), Fraction(mu))
        if "rho" in low:
            c, _, mu = low.replace(" ", "").partition("*rho^")
            return PowerSigma(float(c), float(Fraction(mu)))
        return ConstSigma(Fraction(t))
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, SigmaError):
            raise
        raise SigmaError(f"cannot parse weight {text!r}") from exc


def sigma_from_dict(d: Mapping) -> SigmaFunction:
    k = d["kind"]
    if k == "const":
        return ConstSigma(float(d["c"]))
    if k == "power":
        return PowerSigma(float(d["c"]), float(d["mu"]))
    if k == "table":
        return TableSigma([float(x) for x in d["rho"]], [float(x) for x in d["sigma"]])
    if k == "growth":
        m = d["majorant"]
        C = (ExpMajorant(float(m["c"]), float(m["k"])) if m["kind"] == "exp"
             else TableMajorant([float(x) for x in m["eps"]], [float(x) for x in m["C"]]))
        return GrowthSigma(C, float(d["mu"]))
    raise SigmaError(f"unknown weight kind {k!r}")


# ---------------------------------------------------------------- symbols

@dataclass
class SymbolValue:
    """Q at one point: log|Q|, arg Q, and a bound on the relative error."""

    log_abs: float
    arg: float
    rel_error_bound: float
    head: int

    @property
    def value(self) -> complex:
        return complex(math.exp(self.log_abs) * complex(math.cos(self.arg), math.sin(self.arg))) \
            if self.log_abs < 709 else complex(math.inf)

    @property
    def abs(self) -> float:
        return math.exp(self.log_abs) if self.log_abs < 709 else math.inf

    def to_dict(self) -> dict:
        return {"log_abs": repr(self.log_abs), "arg": repr(self.arg),
                "abs": mpmath.nstr(mpmath.exp(self.log_abs), 17),
                "rel_error_bound": repr(self.rel_error_bound), "head": self.head}


def _hurwitz_scaled(a: float, q: int) -> float:
    """q^a zeta(a, q) = sum_{p >= q} (q/p)^a, which lies in [1, 1 + q/(a-1)]."""
    # the default 15 digits lose ~1e-9 relative accuracy for large a
    with mpmath.workdps(35):
        return float(mpmath.zeta(a, q) * mpmath.power(q, a))


def _bracket_sq(zeta) -> complex:
    z = np.atleast_1d(np.asarray(zeta, dtype=complex))
    return complex(np.sum(z * z))


class UltradiffSymbol:
    """Q(zeta) = prod_{p>=1} (1 - <zeta>^2 / (p^{2s} sigma(p)))."""

    def __init__(self, s, sigma: SigmaFunction, tol: float = 1e-12, max_index: int = MAX_INDEX):
        self.s = _num(s)
        if self.s < 1:
            raise ValueError("the Gevrey exponent must be at least 1")
        self.sigma = sigma
        self.tol = tol
        self.max_index = max_index
        self.sigma1 = float(sigma(1.0))

    @property
    def guarantee(self) -> str:
        if self.sigma.divergent:
            return "type {p!^s} and strongly elliptic on |Im zeta| <= |Re zeta|/2"
        return "type (p!^s): constant weight, no divergence of sigma"

    def to_dict(self) -> dict:
        return {"s": repr(self.s), "sigma": self.sigma.to_dict(), "sigma_text": self.sigma.text(),
                "truncation": {"tol": repr(self.tol), "max_index": self.max_index},
                "guarantee": self.guarantee}

    def denominators(self, P: int) -> np.ndarray:
        p = np.arange(1, P + 1, dtype=float)
        return np.power(p, 2 * self.s) * self.sigma(p)

    def _head(self, w: complex, P: int) -> complex:
        d = self.denominators(P)
        if w.imag == 0 and w.real <= 0:
            return complex(np.sum(np.log1p(-w.real / d)), 0.0)
        return complex(np.sum(np.log(1 - w / d)))

    def _tail_exact(self, w: complex, P: int, c: float, beta: float, tol: float):
        """log prod_{p>P} (1 - w/(c p^beta)) by the Hurwitz series and its remainder bound."""
        x = w / (c * (P + 1) ** beta)
        q = abs(x)
        total = 0j
        m = 1
        remainder = math.inf
        while m < 200:
            zm = _hurwitz_scaled(beta * m, P + 1)
            total -= (x ** m) * zm / m
            # remaining terms shrink at least geometrically with ratio q
            remainder = q ** (m + 1) * zm / ((m + 1) * (1 - q))
            if remainder < tol * 1e-3:
                break
            m += 1
        return total, remainder

    def eval(self, zeta, tol: Optional[float] = None, head: Optional[int] = None) -> SymbolValue:
        """Q(zeta) with a guaranteed relative error bound."""
        tol = self.tol if tol is None else tol
        if not tol > 0:
            raise ValueError("tol must be positive")
        w = _bracket_sq(zeta)
        if w == 0:
            return SymbolValue(0.0, 0.0, 0.0, 0)
        aw = abs(w)
        # beyond P0 every factor satisfies |w|/(p^{2s} sigma(p)) <= 1/2
        P0 = max(8, int(math.ceil((2 * aw / self.sigma1) ** (1.0 / (2 * self.s)))))
        tp = self.sigma.tail_power()
        if head is not None:
            P = head
        elif tp is not None:
            P = max(P0, int(math.ceil(tp[2])) + 1)
        else:
            P = P0
            while self._tail_bound(aw, P) > tol / 2:
                P *= 2
                if P > self.max_index:
                    raise TruncationError(f"tolerance {tol} not met below index {self.max_index}")
        if P > self.max_index:
            raise TruncationError(f"index {P} exceeds the budget {self.max_index}")
        lg = self._head(w, P)
        rounding = 4e-16 * (P + abs(lg.real) + 1.0)
        if tp is not None and P >= tp[2] and aw / (tp[0] * (P + 1) ** (2 * self.s + tp[1])) <= 0.5:
            tail, rem = self._tail_exact(w, P, tp[0], 2 * self.s + tp[1], tol)
            lg += tail
            err = rem + rounding
        else:
            err = self._tail_bound(aw, P) + rounding
        return SymbolValue(lg.real, lg.imag, math.expm1(err), P)

    def _tail_bound(self, aw: float, P: int) -> float:
        """|log prod_{p>P}| <= 2 |w| zeta(2s, P+1) / sigma(P+1) once the factors are small."""
        return 2 * aw * _hurwitz_scaled(2 * self.s, P + 1) / (P + 1) ** (2 * self.s) / float(self.sigma(float(P + 1)))

    def at_i(self, zeta, tol: Optional[float] = None, head: Optional[int] = None) -> SymbolValue:
        """Q(i zeta)."""
        return self.eval(1j * np.asarray(zeta, dtype=complex), tol, head)

    def log_abs_real(self, xi: Sequence[float], tol: Optional[float] = None) -> np.ndarray:
        """log Q(i xi) for an array of radii |xi|, with a shared truncation index."""
        xs = np.abs(np.asarray(xi, dtype=float))
        if xs.size == 0:
            return xs
        tol = self.tol if tol is None else tol
        w = xs * xs
        wmax = float(np.max(w))
        if wmax == 0:
            return np.zeros_like(xs)
        P = max(8, int(math.ceil((2 * wmax / self.sigma1) ** (1.0 / (2 * self.s)))))
        tp = self.sigma.tail_power()
        exact = tp is not None
        if exact:
            P = max(P, int(math.ceil(tp[2])) + 1)
        else:
            while self._tail_bound(wmax, P) > tol / 2:
                P *= 2
                if P > self.max_index:
                    raise TruncationError(f"tolerance {tol} not met below index {self.max_index}")
        if P > self.max_index:
            raise TruncationError(f"index {P} exceeds the budget {self.max_index}")
        d = self.denominators(P)
        out = np.empty_like(xs)
        chunk = max(1, 2_000_000 // P)
        for a in range(0, len(w), chunk):
            out[a:a + chunk] = np.sum(np.log1p(w[a:a + chunk, None] / d[None, :]), axis=1)
        if exact:
            c, beta = tp[0], 2 * self.s + tp[1]
            scale = c * (P + 1) ** beta
            x = -w / scale
            q = wmax / scale
            m, rem = 1, math.inf
            # log(1 + y) = -sum (-y)^m / m, with y = w / (c p^beta)
            while rem > tol * 1e-3 and m < 400:
                zm = _hurwitz_scaled(beta * m, P + 1)
                out -= (x ** m) * zm / m
                rem = q ** (m + 1) * zm / ((m + 1) * (1 - q))
                m += 1
        return out

    def q_index(self, xi_norm: float) -> int:
        """Largest q with q^{2s} sigma(q) <= |xi|^2 (0 if none)."""
        target = xi_norm ** 2
        if self.sigma1 > target:
            return 0
        lo, hi = 1, 2
        while hi ** (2 * self.s) * float(self.sigma(float(hi))) <= target:
            lo, hi = hi, hi * 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if mid ** (2 * self.s) * float(self.sigma(float(mid))) <= target:
                lo = mid
            else:
                hi = mid
        return lo


def build_sigma_symbol(sigma: SigmaFunction, s, **kw) -> UltradiffSymbol:
    return UltradiffSymbol(s, sigma, **kw)


class SeriesSymbol:
    """Q(zeta) = sum_k (-1)^k a_{2k} <zeta>^{2k} with finitely many nonzero a_{2k} >= 0.

    Values are computed in mpmath; ``Q(i zeta) = sum a_{2k} <zeta>^{2k}``.
    """

    def __init__(self, coeffs: Mapping[int, object]):
        self.coeffs = {int(k): mpmath.mpf(v) for k, v in coeffs.items() if v != 0}
        for k in self.coeffs:
            if k % 2:
                raise ValueError("only even powers <zeta>^{2k} occur")

    def at_i(self, zeta, tol=None, head=None) -> SymbolValue:
        w = _bracket_sq(zeta)
        wm = mpmath.mpc(w.real, w.imag)
        total = mpmath.mpc(0)
        for k2, a in sorted(self.coeffs.items()):
            total += a * wm ** (k2 // 2)
        if total == 0:
            return SymbolValue(-math.inf, 0.0, 0.0, len(self.coeffs))
        return SymbolValue(float(mpmath.log(abs(total))), float(mpmath.arg(total)), 0.0, len(self.coeffs))

    def eval(self, zeta, tol=None, head=None) -> SymbolValue:
        return self.at_i(-1j * np.asarray(zeta, dtype=complex))

    def to_dict(self) -> dict:
        return {"coefficients": {str(k): mpmath.nstr(v, 30) for k, v in sorted(self.coeffs.items())}}


def constant_symbol(c=1) -> SeriesSymbol:
    return SeriesSymbol({0: c})


# ---------------------------------------------------------------- bounds

def lower_bound_log(Q: UltradiffSymbol, xi_norm) -> np.ndarray:
    """log of 1/2 exp(log 2 |xi|^{1/s} / sigma(|xi|^{1/s} + 1))."""
    r = np.power(np.asarray(xi_norm, dtype=float), 1.0 / Q.s)
    return math.log(0.5) + LOG2 * r / Q.sigma(r + 1.0)


@dataclass
class BoundCheck:
    points: int
    violations: int
    worst_margin: float
    onset: Optional[float] = None
    detail: Dict[str, object] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        d = {"points": self.points, "violations": self.violations, "worst_margin": repr(self.worst_margin),
             "onset": None if self.onset is None else repr(self.onset), "ok": self.ok}
        d.update(self.detail)
        return d


def lower_bound_onset(Q: UltradiffSymbol, lo: float = 1.0, hi: float = 1e3, n: int = 400) -> float:
    """Smallest sampled |xi| after which the lower bound held on every sample up to ``hi``."""
    xs = np.geomspace(lo, hi, n)
    margin = Q.log_abs_real(xs) - lower_bound_log(Q, xs)
    bad = np.nonzero(margin < 0)[0]
    if len(bad) == 0:
        return float(xs[0])
    if bad[-1] == n - 1:
        return math.inf
    return float(xs[bad[-1] + 1])


def check_lower_bound(Q: UltradiffSymbol, xs: Sequence[float]) -> BoundCheck:
    xs = np.asarray(xs, dtype=float)
    margin = Q.log_abs_real(xs) - lower_bound_log(Q, xs)
    return BoundCheck(len(xs), int(np.sum(margin < 0)), float(np.min(margin)))


def check_q_bound(Q: UltradiffSymbol, xs: Sequence[float]) -> BoundCheck:
    """|Q(i xi)| >= 2^{q} with q^{2s} sigma(q) <= |xi|^2."""
    xs = np.asarray(xs, dtype=float)
    lq = Q.log_abs_real(xs)
    qs = np.array([Q.q_index(x) for x in xs], dtype=float)
    margin = lq - qs * LOG2
    return BoundCheck(len(xs), int(np.sum(margin < -1e-12)), float(np.min(margin)))


def upper_bound_fit(Q: UltradiffSymbol, xs: Sequence[float], deltas: Sequence[float]) -> Dict[float, float]:
    """Least log C_delta with log|Q(i xi)| <= delta |xi|^{1/s} + log C_delta on the samples."""
    xs = np.asarray(xs, dtype=float)
    lq = Q.log_abs_real(xs)
    r = np.power(xs, 1.0 / Q.s)
    return {float(d): float(max(0.0, np.max(lq - d * r))) for d in deltas}


@dataclass
class ConeReport:
    aperture: float
    samples: int
    min_abs: float
    min_at: Tuple[List[float], List[float]]
    factorwise_guarantee: bool
    note: str

    def to_dict(self) -> dict:
        return {"aperture": repr(self.aperture), "samples": self.samples, "min_abs": repr(self.min_abs),
                "min_at": {"xi": [repr(x) for x in self.min_at[0]], "eta": [repr(x) for x in self.min_at[1]]},
                "factorwise_guarantee": self.factorwise_guarantee, "note": self.note}


def check_strong_ellipticity(Q, lam: float = 0.5, samples: int = 1000, dim: int = 2,
                             radius: Tuple[float, float] = (1e-2, 1e3), seed: int = 0) -> ConeReport:
    """Sample |Q(i zeta)| on the cone |Im zeta| <= lam |Re zeta|.

    For a product symbol every factor is 1 + <zeta>^2/(p^{2s} sigma(p)) with
    Re <zeta>^2 = |xi|^2 - |eta|^2 >= 0 inside the cone, so each factor has
    modulus at least 1 whenever lam <= 1.
    """
    if not 0 < lam <= 0.5:
        raise ValueError("aperture must lie in (0, 1/2]")
    rng = np.random.default_rng(seed)
    best = math.inf
    where = ([], [])
    for k in range(samples):
        d = rng.normal(size=dim)
        d /= np.linalg.norm(d)
        xi = d * math.exp(rng.uniform(math.log(radius[0]), math.log(radius[1])))
        e = rng.normal(size=dim)
        e /= np.linalg.norm(e)
        # a quarter of the samples sit on the boundary of the cone
        frac = 1.0 if k % 4 == 0 else rng.uniform(0, 1)
        eta = e * lam * frac * np.linalg.norm(xi)
        v = Q.at_i(xi + 1j * eta)
        a = math.exp(v.log_abs) if v.log_abs < 709 else math.inf
        if a < best:
            best, where = a, (xi.tolist(), eta.tolist())
    exact = isinstance(Q, UltradiffSymbol)
    note = ("each factor has modulus >= 1 on the cone, so |Q(i zeta)| >= 1 exactly" if exact
            else "sampled minimum only")
    return ConeReport(lam, samples, best, where, exact, note)


# ---------------------------------------------------------------- coefficient classes

@dataclass
class ClassVerdict:
    kind: str
    s: float
    verdict: str              # consistent-with | violates
    alpha: Optional[Tuple[int, ...]]
    constants: Dict[str, object]
    trend: float

    def to_dict(self) -> dict:
        return {"kind": self.kind, "s": repr(self.s), "verdict": self.verdict,
                "alpha": None if self.alpha is None else list(self.alpha),
                "constants": self.constants, "trend": repr(self.trend)}


def _coeff_table(coeffs, A: int, dim: int) -> Dict[Tuple[int, ...], object]:
    if isinstance(coeffs, Mapping):
        out = {}
        for k, v in coeffs.items():
            a = (k,) if isinstance(k, int) else tuple(k)
            if sum(a) <= A:
                out[a] = v
        return out
    if callable(coeffs):
        if dim == 1:
            return {(k,): coeffs(k) for k in range(A + 1)}
        return {a: coeffs(a) for a in iproduct(range(A + 1), repeat=dim) if sum(a) <= A}
    return {(k,): v for k, v in enumerate(list(coeffs)[:A + 1])}


def _log_abs(v) -> float:
    if v == 0:
        return -math.inf
    return float(mpmath.log(abs(mpmath.mpf(v) if not isinstance(v, mpmath.mpc) else v)))


def check_symbol_class(coeffs, s, kind: str = "roumieu", A: int = 16, dim: int = 1,
                       eps_grid: Sequence[float] = (1.0, 0.5, 0.25, 0.125, 0.0625),
                       trend_tol: float = 0.02) -> ClassVerdict:
    """Test a_alpha against C_eps eps^{|alpha|}/|alpha|!^s (Roumieu) or C h^{|alpha|}/|alpha|!^s (Beurling).

    Finite data cannot prove membership, so the verdict is either
    ``consistent-with`` or ``violates``.  The statistic is
    r_k = (max_{|alpha|=k} |a_alpha| k!^s)^{1/k}: Roumieu membership means
    r_k -> 0, Beurling membership means r_k stays bounded.  The trend is the
    least-squares slope of log r_k against log k over the nonzero entries.
    Data whose nonzero entries end by ``A // 2`` is read as finite order.
    """
    if A < 8:
        raise ValueError("need A >= 8 coefficients")
    s = _num(s)
    kind = kind.lower()
    if kind not in ("roumieu", "beurling"):
        raise ValueError("kind is 'roumieu' or 'beurling'")
    table = _coeff_table(coeffs, A, dim)
    if not table:
        raise ValueError("empty coefficient sample")
    by_k: Dict[int, Tuple[float, Tuple[int, ...]]] = {}
    for a, v in table.items():
        k = sum(a)
        la = _log_abs(v)
        if k not in by_k or la > by_k[k][0]:
            by_k[k] = (la, a)
    la0 = by_k.get(0, (-math.inf, None))[0]
    ks = sorted(k for k in by_k if k >= 1 and by_k[k][0] > -math.inf)
    logr = {k: (by_k[k][0] + s * math.lgamma(k + 1)) / k for k in ks}
    if len(ks) >= 2:
        x = np.log(np.array(ks, dtype=float))
        y = np.array([logr[k] for k in ks])
        trend = float(np.polyfit(x, y, 1)[0])
    else:
        trend = -math.inf if not ks else 0.0
    # coefficients that stop well inside the sample: finite order, in every class
    finite = not ks or max(ks) <= A // 2
    constants: Dict[str, object] = {}
    if kind == "roumieu":
        for e in eps_grid:
            vals = [la0] + [by_k[k][0] + s * math.lgamma(k + 1) - k * math.log(e) for k in ks]
            constants[f"C_eps[{e:g}]"] = mpmath.nstr(mpmath.exp(max(vals)), 12)
        ok = finite or len(ks) <= 1 or trend < -trend_tol
        alpha = None
        if not ok:
            kk = max(ks, key=lambda k: (logr[k], k))
            alpha = by_k[kk][1]
    else:
        h = math.exp(max(logr.values())) if ks else 1.0
        vals = [la0] + [by_k[k][0] + s * math.lgamma(k + 1) - k * math.log(h) for k in ks]
        constants = {"C": mpmath.nstr(mpmath.exp(max(vals)), 12), "h": repr(h)}
        ok = finite or len(ks) <= 1 or trend <= trend_tol
        alpha = None
        if not ok:
            kk = max(ks, key=lambda k: (logr[k], k))
            alpha = by_k[kk][1]
    return ClassVerdict(kind, s, "consistent-with" if ok else "violates", alpha, constants, trend)


# ---------------------------------------------------------------- witness sequences

def exp_decay(t) -> Callable:
    """The sampler xi -> exp(-|xi|^{1/t}) in mpmath."""
    if isinstance(t, Fraction):
        inv = mpmath.mpf(t.denominator) / t.numerator
    else:
        inv = mpmath.mpf(1) / mpmath.mpf(_num(t))

    def u(xi):
        return mpmath.exp(-mpmath.power(abs(mpmath.mpf(xi)), inv))
    return u


@dataclass
class WitnessConstruction:
    s: float
    M: List[int]
    N: List[int]
    xi: List[mpmath.mpf]
    tau: List[int]
    coeffs: Dict[int, mpmath.mpf]
    checks: Dict[str, bool]
    growth: List[Tuple[mpmath.mpf, mpmath.mpf]]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def symbol(self) -> SeriesSymbol:
        return SeriesSymbol(self.coeffs)

    def to_dict(self) -> dict:
        nstr = lambda x: mpmath.nstr(x, 30)
        return {
            "s": repr(self.s),
            "j": list(range(1, len(self.M) + 1)),
            "M": self.M, "N": self.N, "tau": self.tau,
            "xi": [nstr(x) for x in self.xi],
            "coefficients": {str(k): nstr(v) for k, v in sorted(self.coeffs.items())},
            "growth": [{"value": nstr(a), "bound": nstr(b)} for a, b in self.growth],
            "checks": self.checks,
            "ok": self.ok,
        }


def _s_mp(s) -> mpmath.mpf:
    if isinstance(s, Fraction):
        return mpmath.mpf(s.numerator) / s.denominator
    return mpmath.mpf(s)


def build_witness(u_hat: Callable, s, j_max: int = 4, M_range: Tuple[int, int] = (2, 64),
                  N_range: Tuple[int, int] = (1, 40), xi_max: float = 1e12,
                  grid: int = 3000) -> Optional[WitnessConstruction]:
    """Search (M_j, N_j, xi_j) with M, N strictly increasing,
    |xi_j| > j^j (j+1)!^s and |u(xi_j)| > M_j^{N_j+1} N_j!^s |xi_j|^{-N_j},
    then build the coefficients a_{2k}.  ``None`` when the search fails.

    Candidates come from a float screen on a log grid; every accepted
    inequality is re-checked in 256-bit arithmetic.
    """
    s_f = _num(s)
    with mpmath.workprec(WITNESS_PREC):
        S = _s_mp(Fraction(s) if isinstance(s, (str, Fraction)) else s)
        base = np.geomspace(1.0, xi_max, grid)
        log_u_cache: Dict[float, float] = {}

        def log_u(x: float) -> float:
            if x not in log_u_cache:
                v = abs(u_hat(mpmath.mpf(x)))
                log_u_cache[x] = float(mpmath.log(v)) if v > 0 else -math.inf
            return log_u_cache[x]

        def holds(M: int, N: int, x: float) -> bool:
            X = mpmath.mpf(x)
            v = abs(u_hat(X))
            return v > mpmath.power(M, N + 1) * mpmath.power(mpmath.factorial(N), S) * mpmath.power(X, -N)

        Ms, Ns, xis = [], [], []
        M_prev, N_prev = M_range[0] - 1, N_range[0] - 1
        for j in range(1, j_max + 1):
            Lj = mpmath.power(j, j) * mpmath.power(mpmath.factorial(j + 1), S)
            lo = float(Lj) * (1 + 1e-9)
            if lo >= xi_max:
                return None
            pts = [lo] + [float(x) for x in base if x > lo]
            lus = np.array([log_u(x) for x in pts])
            lx = np.log(np.array(pts))
            found = None
            for M in range(M_prev + 1, M_range[1] + 1):
                for N in range(N_prev + 1, N_range[1] + 1):
                    rhs = (N + 1) * math.log(M) + s_f * math.lgamma(N + 1)
                    g = lus + N * lx
                    order = np.argsort(-g, kind="stable")[:5]
                    for idx in order:
                        if g[idx] <= rhs - 1e-6:
                            break
                        x = pts[idx]
                        if mpmath.mpf(x) > Lj and holds(M, N, x):
                            found = (M, N, x)
                            break
                    if found:
                        break
                if found:
                    break
            if found is None:
                return None
            M_prev, N_prev = found[0], found[1]
            Ms.append(found[0])
            Ns.append(found[1])
            xis.append(mpmath.mpf(found[2]))

        tau, coeffs = [], {}
        for j, (M, N) in enumerate(zip(Ms, Ns), start=1):
            fN = mpmath.power(mpmath.factorial(N), S)
            jj = mpmath.power(j, j)
            if (N + j) % 2 == 0:
                tau.append(N + j)
                coeffs[N + j] = 1 / (mpmath.power(M, N) * jj * mpmath.power(mpmath.factorial(j), S) * fN)
            else:
                tau.append(N + j + 1)
                coeffs[N + j + 1] = 1 / (mpmath.power(M, N + 1) * jj
                                         * mpmath.power(mpmath.factorial(j + 1), S) * fN)
        coeffs[0] = mpmath.mpf(1)

        checks = {
            "M_increasing": all(a < b for a, b in zip(Ms, Ms[1:])),
            "N_increasing": all(a < b for a, b in zip(Ns, Ns[1:])),
            "xi_large": all(x > mpmath.power(j, j) * mpmath.power(mpmath.factorial(j + 1), S)
                            for j, x in enumerate(xis, start=1)),
            "u_lower": all(holds(M, N, x) for M, N, x in zip(Ms, Ns, xis)),
        }
        growth = []
        ok_growth = True
        for j, x in enumerate(xis, start=1):
            q = mpmath.fsum(a * mpmath.power(x, k) for k, a in coeffs.items())
            val = q * abs(u_hat(x))
            bound = mpmath.power(x, j) / (mpmath.power(j, j) * mpmath.power(mpmath.factorial(j + 1), S))
            growth.append((val, bound))
            ok_growth = ok_growth and val >= bound
        checks["growth"] = ok_growth
        return WitnessConstruction(s_f, Ms, Ns, xis, tau, coeffs, checks, growth)
