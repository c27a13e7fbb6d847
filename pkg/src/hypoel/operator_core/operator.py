"""Linear differential operators with CoeffExpr coefficients."""

from __future__ import annotations

from itertools import product
from math import comb, prod
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .coeff import CoeffExpr, ZERO_COEFF, ONE_COEFF, as_coeff
from .gauss import GaussQ

MultiIndex = Tuple[int, ...]


class OperatorError(ValueError):
    pass


def _sub_indices(alpha: MultiIndex):
    return product(*(range(a + 1) for a in alpha))


class DiffOperator:
    """P = sum over alpha of a_alpha(x) * D^alpha, with D^alpha = prod d^k/dx_j^k.

    Terms are kept merged and sorted with lexicographically larger
    multi-indices first, so the printed form of ``Dt^2 + t^2*Dx1^2 + Dx2^2``
    round-trips verbatim.
    """

    __slots__ = ("variables", "_terms", "_hash")

    def __init__(self, terms: Mapping[MultiIndex, object], variables: Sequence[str]):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise OperatorError(f"repeated variable in {variables}")
        merged: Dict[MultiIndex, CoeffExpr] = {}
        for alpha, c in terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != len(variables) or any(a < 0 for a in alpha):
                raise OperatorError(f"bad multi-index {alpha} for variables {variables}")
            c = as_coeff(c)
            if c is None:
                raise TypeError("coefficient must be a CoeffExpr or exact number")
            for v in c.variables():
                if v not in variables:
                    raise OperatorError(f"coefficient uses unknown variable {v!r}")
            prev = merged.get(alpha)
            merged[alpha] = c if prev is None else prev + c
        self.variables = variables
        self._terms = {a: c for a, c in sorted(merged.items(), reverse=True) if not c.is_zero()}
        self._hash = None

    # constructors
    @classmethod
    def zero(cls, variables: Sequence[str]) -> "DiffOperator":
        return cls({}, variables)

    @classmethod
    def multiplication(cls, c, variables: Sequence[str]) -> "DiffOperator":
        return cls({(0,) * len(variables): c}, variables)

    @classmethod
    def derivative(cls, var: str, variables: Sequence[str], order: int = 1) -> "DiffOperator":
        variables = tuple(variables)
        alpha = tuple(order if v == var else 0 for v in variables)
        if var not in variables:
            raise OperatorError(f"unknown variable {var!r}")
        return cls({alpha: ONE_COEFF}, variables)

    @classmethod
    def from_named(cls, terms: Iterable[Tuple[Mapping[str, int], object]],
                   variables: Sequence[str]) -> "DiffOperator":
        variables = tuple(variables)
        out: Dict[MultiIndex, CoeffExpr] = {}
        for named, c in terms:
            alpha = tuple(named.get(v, 0) for v in variables)
            c = as_coeff(c)
            out[alpha] = out[alpha] + c if alpha in out else c
        return cls(out, variables)

    # views
    @property
    def terms(self) -> Dict[MultiIndex, CoeffExpr]:
        return self._terms

    def items(self):
        return self._terms.items()

    def coefficient(self, alpha: MultiIndex) -> CoeffExpr:
        return self._terms.get(tuple(alpha), ZERO_COEFF)

    def coefficient_named(self, named: Mapping[str, int]) -> CoeffExpr:
        return self.coefficient(tuple(named.get(v, 0) for v in self.variables))

    def order(self) -> int:
        if not self._terms:
            return -1
        return max(sum(a) for a in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def top_order_terms(self) -> Dict[MultiIndex, CoeffExpr]:
        m = self.order()
        return {a: c for a, c in self._terms.items() if sum(a) == m}

    def has_constant_coefficients(self) -> bool:
        return all(c.is_constant() for c in self._terms.values())

    def has_polynomial_coefficients(self) -> bool:
        return all(c.is_polynomial() for c in self._terms.values())

    def is_real(self) -> bool:
        return all(c.is_real() for c in self._terms.values())

    def coefficient_variables(self) -> Tuple[str, ...]:
        names = set()
        for c in self._terms.values():
            names.update(c.variables())
        return tuple(v for v in self.variables if v in names)

    def with_variables(self, variables: Sequence[str]) -> "DiffOperator":
        variables = tuple(variables)
        missing = [v for v in self.variables if v not in variables]
        if missing:
            if any(self._uses(v) for v in missing):
                raise OperatorError(f"cannot drop variables {missing} that the operator uses")
        idx = {v: k for k, v in enumerate(self.variables)}
        out = {}
        for alpha, c in self._terms.items():
            out[tuple(alpha[idx[v]] if v in idx else 0 for v in variables)] = c
        return DiffOperator(out, variables)

    def _uses(self, v: str) -> bool:
        k = self.variables.index(v)
        return any(alpha[k] for alpha in self._terms) or any(v in c.variables() for c in self._terms.values())

    # algebra
    def _aligned(self, other: "DiffOperator"):
        if self.variables == other.variables:
            return self, other
        union = tuple(self.variables) + tuple(v for v in other.variables if v not in self.variables)
        return self.with_variables(union), other.with_variables(union)

    def __add__(self, other):
        if not isinstance(other, DiffOperator):
            c = as_coeff(other)
            if c is None:
                return NotImplemented
            other = DiffOperator.multiplication(c, self.variables)
        a, b = self._aligned(other)
        out = dict(a._terms)
        for alpha, c in b._terms.items():
            out[alpha] = out[alpha] + c if alpha in out else c
        return DiffOperator(out, a.variables)

    __radd__ = __add__

    def __neg__(self):
        return DiffOperator({a: -c for a, c in self._terms.items()}, self.variables)

    def __sub__(self, other):
        if not isinstance(other, DiffOperator):
            c = as_coeff(other)
            if c is None:
                return NotImplemented
            other = DiffOperator.multiplication(c, self.variables)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def left_multiply(self, c) -> "DiffOperator":
        """Multiply every coefficient on the left by c (i.e. c * P)."""
        c = as_coeff(c)
        return DiffOperator({a: c * k for a, k in self._terms.items()}, self.variables)

    def compose(self, other: "DiffOperator") -> "DiffOperator":
        """Operator product self o other, expanded by the Leibniz rule."""
        a, b = self._aligned(other)
        n = len(a.variables)
        out: Dict[MultiIndex, CoeffExpr] = {}
        for alpha, ca in a._terms.items():
            for beta, cb in b._terms.items():
                for gamma in _sub_indices(alpha):
                    mult = prod(comb(alpha[k], gamma[k]) for k in range(n))
                    dcb = cb
                    for k in range(n):
                        if gamma[k]:
                            dcb = dcb.diff(a.variables[k], gamma[k])
                            if dcb.is_zero():
                                break
                    if dcb.is_zero():
                        continue
                    key = tuple(alpha[k] - gamma[k] + beta[k] for k in range(n))
                    term = (ca * dcb).scale(mult)
                    out[key] = out[key] + term if key in out else term
        return DiffOperator(out, a.variables)

    def __mul__(self, other):
        if isinstance(other, DiffOperator):
            return self.compose(other)
        c = as_coeff(other)
        if c is None:
            return NotImplemented
        return self.compose(DiffOperator.multiplication(c, self.variables))

    def __rmul__(self, other):
        c = as_coeff(other)
        if c is None:
            return NotImplemented
        return self.left_multiply(c)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result = DiffOperator.multiplication(ONE_COEFF, self.variables)
        for _ in range(n):
            result = result.compose(self)
        return result

    # comparison
    def __eq__(self, other):
        if not isinstance(other, DiffOperator):
            return NotImplemented
        a, b = self._aligned(other)
        return a._terms == b._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, tuple(self._terms.items())))
        return self._hash

    def __str__(self):
        from .dsl import format_operator
        return format_operator(self)

    def __repr__(self):
        return f"DiffOperator({str(self)!r}, variables={self.variables})"


def apply(P: DiffOperator, f) -> CoeffExpr:
    """Apply P to a coefficient expression f."""
    f = as_coeff(f)
    total = ZERO_COEFF
    for alpha, c in P.items():
        g = f
        for k, a in enumerate(alpha):
            if a:
                g = g.diff(P.variables[k], a)
        if not g.is_zero():
            total = total + c * g
    return total


def transpose(P: DiffOperator) -> DiffOperator:
    """Formal transpose: sum of (-1)^|alpha| D^alpha o a_alpha."""
    n = len(P.variables)
    out: Dict[MultiIndex, CoeffExpr] = {}
    for alpha, c in P.items():
        sign = -1 if sum(alpha) % 2 else 1
        for gamma in _sub_indices(alpha):
            dc = c
            for k in range(n):
                if gamma[k]:
                    dc = dc.diff(P.variables[k], gamma[k])
            if dc.is_zero():
                continue
            mult = sign * prod(comb(alpha[k], gamma[k]) for k in range(n))
            key = tuple(alpha[k] - gamma[k] for k in range(n))
            term = dc.scale(mult)
            out[key] = out[key] + term if key in out else term
    return DiffOperator(out, P.variables)


def commutator(P: DiffOperator, Q: DiffOperator) -> DiffOperator:
    return P.compose(Q) - Q.compose(P)


def commutes(P: DiffOperator, Q: DiffOperator) -> bool:
    """Exact test of PQ - QP = 0."""
    return commutator(P, Q).is_zero()


class VectorField(DiffOperator):
    """First-order operator without zeroth-order term: sum of a_j D_j."""

    __slots__ = ()

    def __init__(self, terms: Mapping[MultiIndex, object], variables: Sequence[str]):
        super().__init__(terms, variables)
        for alpha in self._terms:
            if sum(alpha) != 1:
                raise OperatorError("a vector field has only first-order terms")

    @classmethod
    def from_operator(cls, P: DiffOperator) -> "VectorField":
        return cls(P.terms, P.variables)

    @classmethod
    def from_components(cls, comps: Sequence[object], variables: Sequence[str]) -> "VectorField":
        variables = tuple(variables)
        if len(comps) != len(variables):
            raise OperatorError("one component per variable")
        terms = {}
        for k, c in enumerate(comps):
            alpha = tuple(1 if j == k else 0 for j in range(len(variables)))
            terms[alpha] = c
        return cls(terms, variables)

    def components(self) -> List[CoeffExpr]:
        n = len(self.variables)
        return [self.coefficient(tuple(1 if j == k else 0 for j in range(n))) for k in range(n)]


class OperatorSystem:
    """A finite family of vector fields with optional first integrals."""

    def __init__(self, fields: Sequence[DiffOperator], first_integrals: Sequence[object] = (),
                 variables: Optional[Sequence[str]] = None):
        if not fields:
            raise OperatorError("an operator system needs at least one vector field")
        if variables is None:
            names: List[str] = []
            for f in fields:
                names.extend(v for v in f.variables if v not in names)
            variables = names
        self.variables = tuple(variables)
        self.fields = [VectorField.from_operator(f.with_variables(self.variables)) for f in fields]
        self.first_integrals = [as_coeff(z) for z in first_integrals]

    def first_integrals_ok(self) -> bool:
        """Every field annihilates every first integral (exactly)."""
        return all(apply(L, z).is_zero() for L in self.fields for z in self.first_integrals)

    def __len__(self):
        return len(self.fields)

    def __repr__(self):
        return f"OperatorSystem({[str(f) for f in self.fields]})"
