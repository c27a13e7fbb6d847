"""Coefficient expressions: exact polynomials plus closed-form atoms.

``CoeffExpr`` has two representations.  The fast path is an exact ``Poly``
over Q(i).  Anything involving ``exp``, ``sin``, ``cos`` or rational powers is
held as an expanded sympy expression; results that expand back to a Gaussian
rational polynomial are demoted to the ``Poly`` form, so equality stays exact
and structural in both cases.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Dict, Mapping, Optional, Tuple, Union

import mpmath
import sympy

from .gauss import GaussQ, ZERO, ONE
from .poly import Poly, ZERO_POLY, ONE_POLY

ATOM_DEPTH_LIMIT = 64
_NUMERIC_ZERO = mpmath.mpf("1e-45")


class AtomError(ValueError):
    """Raised when an expression leaves the supported atom grammar."""


_SYMBOLS: Dict[str, sympy.Symbol] = {}


def sym(name: str) -> sympy.Symbol:
    s = _SYMBOLS.get(name)
    if s is None:
        s = sympy.Symbol(name, real=True)
        _SYMBOLS[name] = s
    return s


def gauss_to_sympy(c: GaussQ):
    re = sympy.Rational(c.re.numerator, c.re.denominator)
    if not c.im:
        return re
    return re + sympy.I * sympy.Rational(c.im.numerator, c.im.denominator)


def poly_to_sympy(p: Poly):
    terms = []
    for m, c in p.sorted_terms():
        t = gauss_to_sympy(c)
        for v, e in m:
            t = t * sym(v) ** e
        terms.append(t)
    return sympy.Add(*terms)


def _sympy_number_to_gauss(val) -> Optional[GaussQ]:
    re, im = val.as_real_imag()
    if re.is_Rational and im.is_Rational:
        return GaussQ(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))
    return None


def sympy_to_poly(expr) -> Optional[Poly]:
    """Exact conversion when ``expr`` is a Q(i)-polynomial, else None."""
    gens = sorted(expr.free_symbols, key=lambda s: s.name)
    if not gens:
        return Poly.const(_sympy_number_to_gauss(expr)) if _sympy_number_to_gauss(expr) is not None else None
    if not expr.is_polynomial(*gens):
        return None
    P = sympy.Poly(expr, *gens)
    out = {}
    for monom, coeff in P.terms():
        g = _sympy_number_to_gauss(coeff)
        if g is None:
            return None
        mono = tuple((gens[k].name, e) for k, e in enumerate(monom) if e)
        mono = tuple(sorted(mono))
        out[mono] = g
    return Poly(out)


def _atom_depth(expr) -> int:
    if expr.is_Atom:
        return 0
    inner = max((_atom_depth(a) for a in expr.args), default=0)
    if isinstance(expr, (sympy.exp, sympy.sin, sympy.cos)):
        return inner + 1
    if isinstance(expr, sympy.Pow) and not (expr.exp.is_Integer and expr.exp >= 0):
        return inner + 1
    return inner


def _check_atoms(expr) -> None:
    """Only exp/sin/cos/rational powers over rational constants and symbols."""
    for node in sympy.preorder_traversal(expr):
        if node.is_Symbol or node.is_Number or node is sympy.I:
            continue
        if isinstance(node, (sympy.Add, sympy.Mul, sympy.exp, sympy.sin, sympy.cos)):
            continue
        if isinstance(node, sympy.Pow):
            if node.exp.is_Rational:
                continue
            raise AtomError(f"non-rational exponent in {node}")
        raise AtomError(f"unsupported atom {node.func.__name__} in {expr}")
    if _atom_depth(expr) > ATOM_DEPTH_LIMIT:
        raise AtomError("atom nesting deeper than the supported depth")


class CoeffExpr:
    """Immutable coefficient of a differential operator."""

    __slots__ = ("_poly", "_expr", "_hash")

    def __init__(self, value: Union[Poly, "sympy.Expr", int, Fraction, GaussQ]):
        self._hash = None
        if isinstance(value, Poly):
            self._poly, self._expr = value, None
            return
        if isinstance(value, (int, Fraction, GaussQ)):
            self._poly, self._expr = Poly.const(value), None
            return
        expr = sympy.expand(value)
        p = sympy_to_poly(expr)
        if p is not None:
            self._poly, self._expr = p, None
        else:
            _check_atoms(expr)
            self._poly, self._expr = None, expr

    # constructors
    @classmethod
    def const(cls, c) -> "CoeffExpr":
        return cls(Poly.const(c))

    @classmethod
    def var(cls, name: str) -> "CoeffExpr":
        return cls(Poly.var(name))

    @staticmethod
    def exp(arg: "CoeffExpr") -> "CoeffExpr":
        return CoeffExpr(sympy.exp(arg.to_sympy()))

    @staticmethod
    def sin(arg: "CoeffExpr") -> "CoeffExpr":
        return CoeffExpr(sympy.sin(arg.to_sympy()))

    @staticmethod
    def cos(arg: "CoeffExpr") -> "CoeffExpr":
        return CoeffExpr(sympy.cos(arg.to_sympy()))

    def rpow(self, q: Fraction) -> "CoeffExpr":
        """Rational power; integer powers stay polynomial."""
        q = Fraction(q)
        if q.denominator == 1 and q >= 0:
            return self ** int(q)
        if self.is_zero() and q < 0:
            raise ZeroDivisionError("negative power of zero")
        return CoeffExpr(self.to_sympy() ** sympy.Rational(q.numerator, q.denominator))

    # views
    @property
    def poly(self) -> Optional[Poly]:
        return self._poly

    def is_polynomial(self) -> bool:
        return self._poly is not None

    def is_zero(self) -> bool:
        return self._poly is not None and self._poly.is_zero()

    def is_constant(self) -> bool:
        if self._poly is not None:
            return self._poly.is_constant()
        return not self._expr.free_symbols

    def is_real(self) -> bool:
        if self._poly is not None:
            return self._poly.is_real()
        return bool(self._expr.is_real)

    def variables(self) -> Tuple[str, ...]:
        if self._poly is not None:
            return self._poly.variables()
        return tuple(sorted(s.name for s in self._expr.free_symbols))

    def to_sympy(self):
        if self._poly is not None:
            return poly_to_sympy(self._poly)
        return self._expr

    def atom_depth(self) -> int:
        return 0 if self._poly is not None else _atom_depth(self._expr)

    # arithmetic
    def _binop(self, other, pop, sop):
        other = as_coeff(other)
        if other is None:
            return NotImplemented
        if self._poly is not None and other._poly is not None:
            return CoeffExpr(pop(self._poly, other._poly))
        return CoeffExpr(sop(self.to_sympy(), other.to_sympy()))

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b, lambda a, b: a + b)

    def __radd__(self, other):
        return self._binop(other, lambda a, b: b + a, lambda a, b: b + a)

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binop(other, lambda a, b: b - a, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b, lambda a, b: a * b)

    def __rmul__(self, other):
        return self._binop(other, lambda a, b: b * a, lambda a, b: b * a)

    def __neg__(self):
        if self._poly is not None:
            return CoeffExpr(-self._poly)
        return CoeffExpr(-self._expr)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        if self._poly is not None:
            return CoeffExpr(self._poly ** n)
        return CoeffExpr(self._expr ** n)

    def scale(self, c) -> "CoeffExpr":
        c = GaussQ.coerce(c)
        if self._poly is not None:
            return CoeffExpr(self._poly.scale(c))
        return CoeffExpr(self._expr * gauss_to_sympy(c))

    def conjugate(self) -> "CoeffExpr":
        if self._poly is not None:
            return CoeffExpr(self._poly.conjugate())
        return CoeffExpr(sympy.conjugate(self._expr))

    def diff(self, var: str, times: int = 1) -> "CoeffExpr":
        if times == 0:
            return self
        if self._poly is not None:
            return CoeffExpr(self._poly.diff(var, times))
        return CoeffExpr(sympy.diff(self._expr, sym(var), times))

    def diff_multi(self, alpha: Mapping[str, int]) -> "CoeffExpr":
        out = self
        for v in sorted(alpha):
            if alpha[v]:
                out = out.diff(v, alpha[v])
        return out

    # evaluation
    def evaluate(self, point: Mapping[str, object]):
        """Exact value (GaussQ) when possible, else an mpmath complex at 50 digits."""
        if self._poly is not None:
            return self._poly.evaluate(point)
        subs = {}
        for s in self._expr.free_symbols:
            if s.name not in point:
                raise KeyError(f"no value for variable {s.name!r}")
            subs[s] = gauss_to_sympy(GaussQ.coerce(point[s.name]))
        val = sympy.simplify(self._expr.subs(subs))
        if val.has(sympy.zoo, sympy.nan, sympy.oo, -sympy.oo):
            raise ZeroDivisionError(f"{self._expr} is singular at {dict(point)}")
        exact = _sympy_number_to_gauss(val)
        if exact is not None:
            return exact
        re, im = val.evalf(60).as_real_imag()
        with mpmath.workdps(50):
            return mpmath.mpc(mpmath.mpf(str(re)), mpmath.mpf(str(im)))

    def evaluate_float(self, point: Mapping[str, float]) -> complex:
        if self._poly is not None:
            return self._poly.evaluate_float(point)
        subs = {sym(k): v for k, v in point.items()}
        return complex(self._expr.evalf(30, subs=subs))

    def value_is_zero(self, point: Mapping[str, object]) -> bool:
        val = self.evaluate(point)
        if isinstance(val, GaussQ):
            return val.is_zero()
        return abs(val) < _NUMERIC_ZERO

    def taylor_coefficient(self, point: Mapping[str, object], alpha: Mapping[str, int]):
        """Coefficient of (x - point)^alpha in the Taylor expansion at ``point``."""
        if self._poly is not None:
            return self._poly.taylor_coefficient(point, alpha)
        denom = 1
        for e in alpha.values():
            denom *= factorial(e)
        val = self.diff_multi(alpha).evaluate(point)
        if isinstance(val, GaussQ):
            return val / denom
        return val / denom

    # comparison
    def __eq__(self, other):
        other = as_coeff(other)
        if other is None:
            return NotImplemented
        if self._poly is not None and other._poly is not None:
            return self._poly == other._poly
        if (self._poly is None) != (other._poly is None):
            return False
        return sympy.expand(self._expr - other._expr) == 0

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._poly) if self._poly is not None else hash(sympy.srepr(self._expr))
        return self._hash

    def __repr__(self):
        from .dsl import format_coeff
        return f"CoeffExpr({format_coeff(self)})"


def as_coeff(x) -> Optional[CoeffExpr]:
    if isinstance(x, CoeffExpr):
        return x
    if isinstance(x, (int, Fraction, GaussQ, Poly)):
        return CoeffExpr(x)
    return None


ZERO_COEFF = CoeffExpr(ZERO_POLY)
ONE_COEFF = CoeffExpr(ONE_POLY)
