"""Principal symbols, sampled ellipticity, characteristic sets and tube splits.

The principal symbol uses the convention D_j -> i*xi_j, so the Laplacian has
symbol -(xi_x^2 + xi_y^2).  Ellipticity is probed on a region box times a
quasi-uniform grid of the unit frequency sphere, refined by local descent;
a "not_elliptic" verdict for polynomial data is backed by an exact zero found
by rational snapping of the numerical minimiser.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy.optimize import minimize
from scipy.stats import norm, qmc

from .operator_core import CoeffExpr, DiffOperator, GaussQ, Poly
from .operator_core.coeff import sym
from .operator_core.dsl import format_poly
from .operator_core.poly import monomial

DEFAULT_TOL = 1e-9
DEFAULT_RESOLUTION = 4096
N_REFINE = 16


def dual_name(v: str) -> str:
    return f"xi_{v}"


class SymbolPoly:
    """p(x, xi) = sum over |alpha| = m of c_alpha(x) * xi^alpha."""

    def __init__(self, terms: Mapping[Tuple[int, ...], CoeffExpr], variables: Sequence[str], degree: int):
        self.variables = tuple(variables)
        self.degree = degree
        self.terms = {a: c for a, c in terms.items() if not c.is_zero()}
        for a in self.terms:
            if sum(a) != degree:
                raise ValueError("symbol must be homogeneous")
        self._numeric = None

    @property
    def dual_variables(self) -> Tuple[str, ...]:
        return tuple(dual_name(v) for v in self.variables)

    def coefficient_variables(self) -> Tuple[str, ...]:
        names = set()
        for c in self.terms.values():
            names.update(c.variables())
        return tuple(v for v in self.variables if v in names)

    def is_polynomial(self) -> bool:
        return all(c.is_polynomial() for c in self.terms.values())

    def to_poly(self) -> Poly:
        """The symbol as one polynomial in x and xi (polynomial coefficients only)."""
        if not self.is_polynomial():
            raise ValueError("symbol has non-polynomial coefficients")
        total = Poly()
        for alpha, c in self.terms.items():
            xi = monomial({dual_name(v): a for v, a in zip(self.variables, alpha)})
            total = total + c.poly * xi
        return total

    def evaluate(self, x: Mapping[str, object], xi: Sequence[object]):
        """Exact value (GaussQ) when coefficients are polynomial, else mpmath complex."""
        xi = [GaussQ.coerce(Fraction(v) if not isinstance(v, GaussQ) else v) for v in xi]
        total = GaussQ(0)
        numeric = None
        for alpha, c in self.terms.items():
            mono = GaussQ(1)
            for v, a in zip(xi, alpha):
                if a:
                    mono = mono * v ** a
            val = c.evaluate(x)
            if isinstance(val, GaussQ):
                total = total + val * mono
            else:
                term = val * complex(mono)
                numeric = term if numeric is None else numeric + term
        if numeric is None:
            return total
        return numeric + complex(total)

    def _compile(self):
        if self._numeric is None:
            cvars = self.coefficient_variables()
            syms = [sym(v) for v in cvars]
            funcs = []
            for alpha, c in self.terms.items():
                f = sympy.lambdify(syms, c.to_sympy(), modules="numpy")
                funcs.append((np.array(alpha), f))
            self._numeric = (cvars, funcs)
        return self._numeric

    def evaluate_numpy(self, xs: np.ndarray, xis: np.ndarray) -> np.ndarray:
        """Values on a product grid: xs has shape (K, len(coefficient_variables)),
        xis has shape (N, n).  Returns a complex array of shape (K, N)."""
        cvars, funcs = self._compile()
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        xis = np.asarray(xis, dtype=float)
        out = np.zeros((xs.shape[0], xis.shape[0]), dtype=complex)
        cols = [xs[:, k] for k in range(len(cvars))]
        with np.errstate(all="ignore"):
            for alpha, f in funcs:
                cv = np.broadcast_to(np.asarray(f(*cols), dtype=complex), (xs.shape[0],))
                mono = np.prod(xis ** alpha, axis=1)
                out += cv[:, None] * mono[None, :]
        return out

    def __str__(self):
        if self.is_polynomial():
            return format_poly(self.to_poly())
        parts = []
        from .operator_core.dsl import format_coeff
        for alpha, c in self.terms.items():
            mono = "*".join(f"{dual_name(v)}^{a}" if a > 1 else dual_name(v)
                            for v, a in zip(self.variables, alpha) if a)
            parts.append(f"({format_coeff(c)})*{mono}")
        return " + ".join(parts)


def principal_symbol(P: DiffOperator) -> SymbolPoly:
    m = P.order()
    if m < 0:
        return SymbolPoly({}, P.variables, 0)
    unit = GaussQ(0, 1) ** m
    terms = {a: c.scale(unit) for a, c in P.top_order_terms().items()}
    return SymbolPoly(terms, P.variables, m)


# sphere sampling

def _spiral3(n: int) -> np.ndarray:
    h = -1 + 2 * np.arange(n) / (n - 1)
    theta = np.arccos(h)
    phi = np.zeros(n)
    for k in range(1, n - 1):
        phi[k] = (phi[k - 1] + 3.6 / np.sqrt(n * (1 - h[k] ** 2))) % (2 * np.pi)
    return np.column_stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), h])


def _sphere_level(dim: int, n: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        ang = 2 * np.pi * np.arange(n) / n
        pts = np.column_stack([np.cos(ang), np.sin(ang)])
        pts[np.abs(pts) < 1e-15] = 0.0
        return pts
    if dim == 3:
        return _spiral3(n)
    halton = qmc.Halton(d=dim, scramble=False).random(n + 1)[1:]
    g = norm.ppf(np.clip(halton, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sphere_points(dim: int, resolution: int = DEFAULT_RESOLUTION) -> np.ndarray:
    """Nested quasi-uniform points on S^{dim-1}: the set for N contains the set for N/2."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    if dim == 1:
        return _sphere_level(1, 2)
    if dim == 2:
        n = 8
        while n < resolution:
            n *= 2
        return _sphere_level(2, n)
    levels = []
    n = resolution
    while n >= 8:
        levels.append(_sphere_level(dim, n))
        n //= 2
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    return np.vstack(levels[::-1] + [axes])


# region handling

def _normalize_region(P_vars: Sequence[str], region: Optional[Mapping[str, object]]):
    box = {}
    if region:
        for v, (lo, hi) in region.items():
            lo, hi = Fraction(lo), Fraction(hi)
            if lo > hi:
                raise ValueError(f"empty region for {v}: [{lo}, {hi}]")
            box[v] = (lo, hi)
    for v in P_vars:
        if v not in box:
            if region is not None and len(region) > 0:
                raise ValueError(f"region does not constrain coefficient variable {v!r}")
            box[v] = (Fraction(-1), Fraction(1))
    return box


def _region_grid(cvars, box, points_per_axis: int) -> np.ndarray:
    if not cvars:
        return np.zeros((1, 0))
    axes = []
    for v in cvars:
        lo, hi = box[v]
        if lo == hi:
            axes.append(np.array([float(lo)]))
        else:
            axes.append(np.linspace(float(lo), float(hi), points_per_axis))
    return np.array(list(product(*axes)), dtype=float)


@dataclass
class EllipticityReport:
    verdict: str
    margin: float
    grid_margin: float
    resolution: int
    tol: float
    n_samples: int
    witness_x: Optional[Dict[str, float]] = None
    witness_xi: Optional[Tuple[float, ...]] = None
    exact_witness: Optional[Dict[str, object]] = None
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "margin": self.margin,
            "grid_margin": self.grid_margin,
            "resolution": self.resolution,
            "tol": self.tol,
            "n_samples": self.n_samples,
            "witness": None if self.witness_xi is None else {
                "x": self.witness_x, "xi": list(self.witness_xi)},
            "exact_witness": self.exact_witness,
            "note": self.note,
        }


@dataclass
class CharSet:
    points: List[Tuple[Dict[str, float], Tuple[float, ...]]]
    values: List[float]
    tol: float
    resolution: int
    points_per_axis: int
    region: Dict[str, Tuple[str, str]] = field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    def to_dict(self) -> dict:
        return {
            "tol": self.tol,
            "resolution": self.resolution,
            "points_per_axis": self.points_per_axis,
            "region": self.region,
            "points": [{"x": x, "xi": list(xi), "abs": v} for (x, xi), v in zip(self.points, self.values)],
        }


class _Probe:
    """Shared sampling + descent machinery for one symbol over one box."""

    def __init__(self, p: SymbolPoly, box, resolution: int, points_per_axis: int):
        self.p = p
        self.cvars = p.coefficient_variables()
        self.box = box
        self.n = len(p.variables)
        self.xs = _region_grid(self.cvars, box, points_per_axis)
        self.xis = sphere_points(self.n, resolution)
        vals = np.abs(p.evaluate_numpy(self.xs, self.xis))
        if not np.all(np.isfinite(vals)):
            raise ValueError("symbol is singular inside the region")
        self.vals = vals
        self.lo = np.array([float(box[v][0]) for v in self.cvars])
        self.hi = np.array([float(box[v][1]) for v in self.cvars])

    def smallest(self, k: int):
        flat = np.argsort(self.vals, axis=None, kind="stable")[:k]
        out = []
        for idx in flat:
            i, j = np.unravel_index(idx, self.vals.shape)
            out.append((self.xs[i].copy(), self.xis[j].copy(), float(self.vals[i, j])))
        return out

    def value(self, x: np.ndarray, xi: np.ndarray) -> float:
        nrm = np.linalg.norm(xi)
        if nrm == 0:
            return np.inf
        return float(abs(self.p.evaluate_numpy(x[None, :], (xi / nrm)[None, :])[0, 0]))

    def descend(self, x0: np.ndarray, xi0: np.ndarray):
        k = len(x0)

        def obj(z):
            x = np.clip(z[:k], self.lo, self.hi)
            v = self.value(x, z[k:])
            return v * v

        z0 = np.concatenate([x0, xi0])
        v0 = obj(z0)
        # relative stopping: a flat symbol (|xi|^2 on the sphere) must not burn the budget
        res = minimize(obj, z0, method="Nelder-Mead",
                       options={"xatol": 1e-11, "fatol": max(1e-30, 1e-10 * v0),
                                "maxiter": 4000, "maxfev": 8000})
        x = np.clip(res.x[:k], self.lo, self.hi)
        xi = res.x[k:]
        nrm = np.linalg.norm(xi)
        xi = xi / nrm if nrm else xi0
        return x, xi, self.value(x, xi)

    def snap_exact(self, x: np.ndarray, xi: np.ndarray):
        """Try to find an exact rational zero near (x, xi); returns it or None."""
        if not self.p.is_polynomial():
            return None
        scale = np.max(np.abs(xi))
        if scale == 0:
            return None
        for den in (1, 2, 3, 4, 6, 8, 12, 16, 32, 64, 128, 256, 1024):
            xr = {}
            ok = True
            for v, val, lo, hi in zip(self.cvars, x, self.lo, self.hi):
                q = Fraction(float(val)).limit_denominator(den)
                if not (self.box[v][0] <= q <= self.box[v][1]):
                    ok = False
                    break
                xr[v] = q
            if not ok:
                continue
            xir = [Fraction(float(c / scale)).limit_denominator(den) for c in xi]
            if all(c == 0 for c in xir):
                continue
            for v in self.p.variables:
                xr.setdefault(v, Fraction(0))
            if self.p.evaluate(xr, xir).is_zero():
                return {v: xr[v] for v in self.cvars}, xir
        return None


def _to_unit(xir: Sequence[Fraction]) -> Tuple[float, ...]:
    arr = np.array([float(c) for c in xir])
    return tuple((arr / np.linalg.norm(arr)).tolist())


def is_elliptic(P: DiffOperator, region: Optional[Mapping[str, object]] = None,
                resolution: int = DEFAULT_RESOLUTION, tol: float = DEFAULT_TOL,
                points_per_axis: int = 5) -> EllipticityReport:
    """Sampled ellipticity verdict for P over ``region`` (a box var -> (lo, hi)).

    Variables that the region leaves out default to [-1, 1] only when no
    region is given at all.
    """
    p = principal_symbol(P)
    if p.degree <= 0 and not p.terms:
        raise ValueError("zero operator has no principal symbol")
    box = _normalize_region(p.coefficient_variables(), region)
    probe = _Probe(p, box, resolution, points_per_axis)
    grid_margin = float(probe.vals.min())
    starts = probe.smallest(N_REFINE)
    best = (grid_margin, starts[0][0], starts[0][1])
    exact = None
    for x0, xi0, v0 in starts:
        cand = [(x0, xi0, v0)]
        if v0 > 0:
            cand.append(probe.descend(x0, xi0))
        for x, xi, v in cand:
            if v < best[0]:
                best = (v, x, xi)
            if exact is None and v <= max(tol, 1e-6):
                exact = probe.snap_exact(x, xi)
        if exact is not None:
            break
    margin, wx, wxi = best
    n_samples = probe.vals.size
    wx_d = {v: float(c) for v, c in zip(probe.cvars, wx)}
    if exact is not None:
        ex_x, ex_xi = exact
        return EllipticityReport(
            "not_elliptic", 0.0, grid_margin, resolution, tol, n_samples,
            witness_x={v: float(c) for v, c in ex_x.items()}, witness_xi=_to_unit(ex_xi),
            exact_witness={"x": {v: str(c) for v, c in ex_x.items()}, "xi": [str(c) for c in ex_xi]},
            note="exact zero of the principal symbol")
    if margin > 10 * tol:
        return EllipticityReport("elliptic", margin, grid_margin, resolution, tol, n_samples,
                                 note="sampled minimum of |p_m| on the unit sphere")
    if margin <= tol and not p.is_polynomial():
        return EllipticityReport("not_elliptic", margin, grid_margin, resolution, tol, n_samples,
                                 witness_x=wx_d, witness_xi=tuple(wxi.tolist()),
                                 note="numerical zero (non-polynomial symbol)")
    return EllipticityReport("inconclusive", margin, grid_margin, resolution, tol, n_samples,
                             witness_x=wx_d, witness_xi=tuple(wxi.tolist()),
                             note="small margin without an exact zero")


def characteristic_set_sample(P: DiffOperator, region: Optional[Mapping[str, object]] = None,
                              resolution: int = DEFAULT_RESOLUTION, tol: float = DEFAULT_TOL,
                              points_per_axis: int = 5) -> CharSet:
    """Grid points and refined minimisers where |p_m| <= tol."""
    p = principal_symbol(P)
    box = _normalize_region(p.coefficient_variables(), region)
    probe = _Probe(p, box, resolution, points_per_axis)
    pts, vals = [], []
    seen = set()

    def add(x, xi, v):
        key = tuple(np.round(np.concatenate([x, xi]), 9))
        if key in seen:
            return
        seen.add(key)
        pts.append(({v_: float(c) for v_, c in zip(probe.cvars, x)}, tuple(float(c) for c in xi)))
        vals.append(float(v))

    hits = np.argwhere(probe.vals <= tol)
    for i, j in hits:
        add(probe.xs[i], probe.xis[j], probe.vals[i, j])
    for x0, xi0, v0 in probe.smallest(N_REFINE):
        x, xi, v = probe.descend(x0, xi0) if v0 > 0 else (x0, xi0, v0)
        if v <= tol:
            add(x, xi, v)
    return CharSet(pts, vals, tol, resolution, points_per_axis,
                   {v: (str(lo), str(hi)) for v, (lo, hi) in box.items() if v in probe.cvars})


@dataclass
class TubeDecomposition:
    t_vars: Tuple[str, ...]
    x_vars: Tuple[str, ...]
    P0: DiffOperator
    p0_report: Optional[EllipticityReport]
    same_order: bool

    @property
    def p0_elliptic(self) -> bool:
        return self.p0_report is not None and self.p0_report.verdict == "elliptic"

    @property
    def guards_satisfied(self) -> bool:
        return self.p0_elliptic and self.same_order

    def to_dict(self) -> dict:
        return {
            "t_vars": list(self.t_vars),
            "x_vars": list(self.x_vars),
            "P0": str(self.P0),
            "P0_elliptic": self.p0_elliptic,
            "P0_report": None if self.p0_report is None else self.p0_report.to_dict(),
            "same_order": self.same_order,
            "guards_satisfied": self.guards_satisfied,
        }


def tube_decompose(P: DiffOperator, t_vars: Sequence[str],
                   region: Optional[Mapping[str, object]] = None,
                   resolution: int = 1024, tol: float = DEFAULT_TOL) -> Optional[TubeDecomposition]:
    requested = set(t_vars)
    if not requested or requested - set(P.variables):
        raise ValueError("t_vars must be a non-empty subset of the operator variables")
    t_vars = tuple(v for v in P.variables if v in requested)
    x_vars = tuple(v for v in P.variables if v not in t_vars)
    for c in P.terms.values():
        if any(v in x_vars for v in c.variables()):
            return None
    xk = [P.variables.index(v) for v in x_vars]
    pure = {a: c for a, c in P.items() if all(a[k] == 0 for k in xk)}
    P0 = DiffOperator(pure, P.variables).with_variables(t_vars)
    report = None
    if not P0.is_zero() and P0.order() > 0:
        sub = None if region is None else {v: region[v] for v in t_vars if v in region}
        report = is_elliptic(P0, sub or None, resolution=resolution, tol=tol)
    return TubeDecomposition(t_vars, x_vars, P0, report, P0.order() == P.order())


def nondegenerate_at(P: DiffOperator, x0: Mapping[str, object]) -> bool:
    """True iff some top-order coefficient is nonzero at x0 (exact for polynomials)."""
    point = {}
    for v, val in x0.items():
        point[v] = val if isinstance(val, GaussQ) else Fraction(val)
    for c in P.top_order_terms().values():
        missing = [v for v in c.variables() if v not in point]
        if missing:
            raise ValueError(f"point does not fix {missing}")
        if not c.value_is_zero(point):
            return True
    return False
