"""Komatsu irregularity of ordinary differential operators at a point."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from .operator_core import ATOM_DEPTH_LIMIT, CoeffExpr, DiffOperator
from .operator_core.poly import mono_exp
from .templates import ThresholdFact

INF = float("inf")


@dataclass(frozen=True)
class VanishingOrder:
    """Order of vanishing; ``exact`` is False when only a lower bound is known."""

    value: Union[int, float]
    exact: bool = True

    @property
    def infinite(self) -> bool:
        return self.value == INF and self.exact

    def __str__(self):
        if self.value == INF:
            return "inf"
        return str(self.value) if self.exact else f">={self.value}"


def vanishing_order(f: CoeffExpr, var: str, x0, depth: int = ATOM_DEPTH_LIMIT) -> VanishingOrder:
    """Least j with a nonzero j-th Taylor coefficient of f at var = x0."""
    x0 = Fraction(x0)
    if f.is_polynomial():
        p = f.poly
        others = [v for v in p.variables() if v != var]
        if others:
            raise ValueError(f"coefficient depends on {others}; expected a function of {var}")
        if p.is_zero():
            return VanishingOrder(INF)
        shifted = p.shift({var: x0})
        return VanishingOrder(min(mono_exp(m, var) for m in shifted.terms))
    if any(v != var for v in f.variables()):
        raise ValueError(f"coefficient depends on variables other than {var}")
    g = f
    for j in range(depth + 1):
        if not g.value_is_zero({var: x0}):
            return VanishingOrder(j)
        g = g.diff(var)
        if g.is_zero():
            return VanishingOrder(INF)
    return VanishingOrder(depth + 1, exact=False)


@dataclass
class IrregularityReport:
    point: Fraction
    orders: List[VanishingOrder]
    sigma: Fraction
    sigma_upper: Optional[Fraction]
    maximizers: Tuple[int, ...]

    @property
    def exact(self) -> bool:
        return self.sigma_upper is None or self.sigma_upper == self.sigma

    def to_dict(self) -> dict:
        return {
            "point": str(self.point),
            "orders": [str(o) for o in self.orders],
            "sigma": str(self.sigma),
            "sigma_upper": None if self.sigma_upper is None else str(self.sigma_upper),
            "maximizers": list(self.maximizers),
            "exact": self.exact,
        }


def sigma_from_orders(orders: List[VanishingOrder]) -> Tuple[Fraction, Optional[Fraction], Tuple[int, ...]]:
    """Recompute (sigma, upper bound or None, maximizing indices) from vanishing orders."""
    m = len(orders) - 1
    top = orders[m]
    if top.infinite:
        raise ValueError("leading coefficient vanishes identically")
    if not top.exact:
        raise ValueError("leading coefficient vanishing order beyond depth bound")
    best = Fraction(1)
    upper = Fraction(1)
    uncertain = False
    arg: List[int] = []
    for i in range(m):
        oi = orders[i]
        if oi.infinite:
            continue
        val = Fraction(int(top.value) - int(oi.value), m - i)
        if not oi.exact:
            # ord a_i >= value: quotient is at most val
            uncertain = True
            upper = max(upper, val)
            continue
        if val > best:
            best, arg = val, [i]
        elif val == best and val > 1:
            arg.append(i)
        upper = max(upper, val)
    return best, (upper if uncertain else None), tuple(arg)


def irregularity(P: DiffOperator, x0=0) -> IrregularityReport:
    if len(P.variables) != 1:
        raise ValueError("irregularity is defined for operators in one variable")
    var = P.variables[0]
    m = P.order()
    if m < 0:
        raise ValueError("zero operator")
    orders = [vanishing_order(P.coefficient((i,)), var, x0) for i in range(m + 1)]
    sigma, upper, arg = sigma_from_orders(orders)
    return IrregularityReport(Fraction(x0), orders, sigma, upper, arg)


def irregularity_thresholds(sigma) -> List[ThresholdFact]:
    """Hypoellipticity consequences of a Komatsu irregularity value."""
    sigma = Fraction(sigma)
    if sigma < 1:
        raise ValueError("irregularity is at least 1")
    out: List[ThresholdFact] = []
    if sigma == 1:
        out.append(ThresholdFact("holds", "B", "D'", "", "sigma = 1"))
        out.append(ThresholdFact("holds", "B", "D'({s})", "s > 1", "sigma = 1: every s"))
        out.append(ThresholdFact("holds", "G({s})", "Cw", "s > 1", "sigma = 1: every s"))
        out.append(ThresholdFact("holds", "G{s}", "Cw", "s > 1", "contained in a Beurling class"))
        return out
    bound = sigma / (sigma - 1)
    out.append(ThresholdFact("holds", "B", "D'({s})", f"1 < s <= {bound}", "sigma <= s/(s-1)"))
    out.append(ThresholdFact("holds", "G({s})", "Cw", f"1 < s < {bound}", "sigma < s/(s-1)"))
    out.append(ThresholdFact("holds", "G{s}", "Cw", f"1 < s < {bound}", "G{t} inside G({s}) for t < s"))
    return out


def sharpness_fact(k: int) -> ThresholdFact:
    """For x^{k+1} d/dx - k the Roumieu bound is sharp: failure from 1 + 1/k on."""
    return ThresholdFact("fails", "G{s}", "Cw", f"s >= {1 + Fraction(1, k)}",
                         "exp(-1/x^k) is a non-analytic kernel element")
