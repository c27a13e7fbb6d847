"""Sparse multivariate polynomials over Q(i), keyed by variable name.

A monomial is a tuple of ``(name, exponent)`` pairs sorted by name with every
exponent positive; the empty tuple is the constant monomial.  Polynomials are
immutable and compare structurally, which is exact because the representation
is canonical (no zero coefficients are ever stored).
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Dict, Iterable, Mapping, Tuple

from .gauss import GaussQ, ZERO, ONE

Monomial = Tuple[Tuple[str, int], ...]


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        va, ea = a[i]
        vb, eb = b[j]
        if va == vb:
            out.append((va, ea + eb))
            i += 1
            j += 1
        elif va < vb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_exp(m: Monomial, var: str) -> int:
    for v, e in m:
        if v == var:
            return e
    return 0


class Poly:
    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, GaussQ] | None = None):
        clean: Dict[Monomial, GaussQ] = {}
        if terms:
            for m, c in terms.items():
                c = GaussQ.coerce(c)
                if not c.is_zero():
                    clean[m] = c
        self._terms = clean
        self._hash = None

    # constructors
    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(): GaussQ.coerce(c)})

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls({((name, 1),): ONE})

    @classmethod
    def _raw(cls, terms: Dict[Monomial, GaussQ]) -> "Poly":
        # caller guarantees no zero coefficients
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    # views
    @property
    def terms(self) -> Dict[Monomial, GaussQ]:
        return self._terms

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and () in self._terms)

    def constant_term(self) -> GaussQ:
        return self._terms.get((), ZERO)

    def variables(self) -> Tuple[str, ...]:
        names = set()
        for m in self._terms:
            names.update(v for v, _ in m)
        return tuple(sorted(names))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(mono_degree(m) for m in self._terms)

    def min_degree(self) -> int:
        if not self._terms:
            return -1
        return min(mono_degree(m) for m in self._terms)

    def is_real(self) -> bool:
        return all(c.is_real() for c in self._terms.values())

    def sorted_terms(self):
        """Terms in a deterministic order: by descending degree then lexicographic."""
        return sorted(self._terms.items(), key=lambda kv: (-mono_degree(kv[0]), kv[0]))

    # arithmetic
    def __add__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        if not other._terms:
            return self
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s.is_zero():
                    del out[m]
                else:
                    out[m] = s
        return Poly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        if not self._terms or not other._terms:
            return ZERO_POLY
        out: Dict[Monomial, GaussQ] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = mono_mul(m1, m2)
                c = c1 * c2
                s = out.get(m)
                out[m] = c if s is None else s + c
        return Poly({m: c for m, c in out.items() if not c.is_zero()})

    __rmul__ = __mul__

    def scale(self, c) -> "Poly":
        c = GaussQ.coerce(c)
        if c.is_zero():
            return ZERO_POLY
        return Poly._raw({m: k * c for m, k in self._terms.items()})

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result = ONE_POLY
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def diff(self, var: str, times: int = 1) -> "Poly":
        p = self
        for _ in range(times):
            out: Dict[Monomial, GaussQ] = {}
            for m, c in p._terms.items():
                e = mono_exp(m, var)
                if e == 0:
                    continue
                nm = tuple((v, k - 1) if v == var else (v, k) for v, k in m)
                nm = tuple((v, k) for v, k in nm if k)
                out[nm] = out.get(nm, ZERO) + c * e
            p = Poly(out)
        return p

    def evaluate(self, point: Mapping[str, object]) -> GaussQ:
        """Exact value at a point whose coordinates are rationals or GaussQ."""
        total = ZERO
        cache: Dict[Tuple[str, int], GaussQ] = {}
        for m, c in self._terms.items():
            val = c
            for v, e in m:
                if v not in point:
                    raise KeyError(f"no value for variable {v!r}")
                key = (v, e)
                pw = cache.get(key)
                if pw is None:
                    pw = GaussQ.coerce(point[v]) ** e
                    cache[key] = pw
                val = val * pw
            total = total + val
        return total

    def evaluate_float(self, point: Mapping[str, complex]) -> complex:
        total = 0j
        for m, c in self._terms.items():
            val = complex(c)
            for v, e in m:
                val *= point[v] ** e
            total += val
        return total

    def substitute(self, mapping: Mapping[str, "Poly"]) -> "Poly":
        """Replace variables by polynomials."""
        result = ZERO_POLY
        for m, c in self._terms.items():
            term = Poly.const(c)
            for v, e in m:
                term = term * (mapping[v] ** e if v in mapping else Poly({((v, e),): ONE}))
            result = result + term
        return result

    def shift(self, point: Mapping[str, object]) -> "Poly":
        """Return q with q(y) = p(y + point), i.e. the Taylor expansion at ``point``."""
        mapping = {v: Poly.var(v) + Poly.const(GaussQ.coerce(point[v]))
                   for v in self.variables() if v in point}
        return self.substitute(mapping)

    def taylor_coefficient(self, point: Mapping[str, object], alpha: Mapping[str, int]) -> GaussQ:
        mono = tuple(sorted((v, e) for v, e in alpha.items() if e))
        return self.shift(point).terms.get(mono, ZERO)

    def coefficient_in(self, var: str, power: int) -> "Poly":
        """Coefficient of var**power viewing self as a polynomial in var."""
        out = {}
        for m, c in self._terms.items():
            if mono_exp(m, var) == power:
                out[tuple((v, e) for v, e in m if v != var)] = c
        return Poly(out)

    def conjugate(self) -> "Poly":
        return Poly._raw({m: c.conjugate() for m, c in self._terms.items()})

    # comparison
    def __eq__(self, other):
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        return self._terms == o._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self):
        return f"Poly({self._terms!r})"


def _as_poly(x):
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, Fraction, GaussQ)):
        return Poly.const(x)
    return None


def monomial(powers: Mapping[str, int], coeff=1) -> Poly:
    mono = tuple(sorted((v, e) for v, e in powers.items() if e))
    return Poly({mono: GaussQ.coerce(coeff)})


def from_iterable(terms: Iterable[Tuple[Mapping[str, int], object]]) -> Poly:
    out = ZERO_POLY
    for powers, c in terms:
        out = out + monomial(powers, c)
    return out


ZERO_POLY = Poly()
ONE_POLY = Poly.const(1)
