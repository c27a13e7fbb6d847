"""Lie brackets of vector fields and the pointwise Hormander rank test."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .operator_core import DiffOperator, GaussQ, VectorField, commutator
from .operator_core.dsl import format_operator
from .templates import ThresholdFact

DEFAULT_MAX_LEN = 8
MAX_WORDS = 50_000


def lie_bracket(X: DiffOperator, Y: DiffOperator) -> VectorField:
    """[X, Y] = XY - YX; the second-order parts cancel."""
    return VectorField.from_operator(commutator(X, Y))


def _normalized(X: VectorField) -> VectorField:
    """Scale so the first stored coefficient has leading coefficient 1.

    Brackets that differ by a constant factor span the same line, so this
    removes redundant words without changing any rank.
    """
    for c in X.terms.values():
        lead = c.poly.sorted_terms()[0][1]
        return VectorField.from_operator(X.left_multiply(lead.inverse()))
    return X


def rank_exact(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank over Q by fraction-exact Gaussian elimination."""
    mat = [list(r) for r in rows if any(r)]
    if not mat:
        return 0
    ncols = len(mat[0])
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(mat)) if mat[r][col] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        p = mat[rank][col]
        for r in range(len(mat)):
            if r != rank and mat[r][col] != 0:
                f = mat[r][col] / p
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[rank])]
        rank += 1
        if rank == len(mat):
            break
    return rank


def field_at(X: VectorField, y: Mapping[str, Fraction]) -> List[Fraction]:
    out = []
    for c in X.components():
        val = c.evaluate(y)
        if not isinstance(val, GaussQ) or not val.is_real():
            raise ValueError("field does not evaluate to an exact real vector")
        out.append(val.re)
    return out


@dataclass
class BracketReport:
    point: Dict[str, Fraction]
    max_len: int
    depth: Optional[int]
    ranks: List[int]
    witnesses: List[str]
    witness_fields: List[str]
    n_words: int
    note: str = "rank computed at the point only, not on a neighbourhood"

    def to_dict(self) -> dict:
        return {
            "point": {k: str(v) for k, v in self.point.items()},
            "max_len": self.max_len,
            "depth": self.depth,
            "ranks": self.ranks,
            "witnesses": self.witnesses,
            "witness_fields": self.witness_fields,
            "n_words": self.n_words,
            "note": self.note,
        }


def _check_fields(fields: Sequence[DiffOperator]) -> List[VectorField]:
    if not fields:
        raise ValueError("empty field list")
    variables: List[str] = []
    for f in fields:
        variables.extend(v for v in f.variables if v not in variables)
    out = []
    for f in fields:
        X = VectorField.from_operator(f.with_variables(variables))
        if not X.has_polynomial_coefficients():
            raise ValueError("bracket rank test needs polynomial coefficients")
        if not X.is_real():
            raise ValueError("Hormander's condition is stated for real vector fields")
        out.append(X)
    return out


def hormander_depth(fields: Sequence[DiffOperator], y: Mapping[str, object],
                    max_len: int = DEFAULT_MAX_LEN) -> BracketReport:
    """Least bracket length at which the fields and their brackets span at y."""
    Xs = _check_fields(fields)
    variables = Xs[0].variables
    n = len(variables)
    point = {v: Fraction(y.get(v, 0)) for v in variables}
    names = [f"X{k}" for k in range(len(Xs))]

    by_len: Dict[int, List[Tuple[str, VectorField]]] = {}
    seen = set()
    level1 = []
    for name, X in zip(names, Xs):
        if X.is_zero():
            continue
        key = _normalized(X)
        if key not in seen:
            seen.add(key)
            level1.append((name, X))
    by_len[1] = sorted(level1, key=lambda w: (str(w[1]), w[0]))

    rows: List[List[Fraction]] = []
    basis_words: List[str] = []
    basis_fields: List[str] = []
    ranks: List[int] = []
    depth = None
    n_words = 0
    for ell in range(1, max_len + 1):
        if ell > 1:
            new = []
            for a in range(1, ell // 2 + 1):
                b = ell - a
                for wa, A in by_len.get(a, ()):
                    for wb, B in by_len.get(b, ()):
                        if a == b and wa >= wb:
                            continue
                        C = lie_bracket(A, B)
                        if C.is_zero():
                            continue
                        key = _normalized(C)
                        if key in seen:
                            continue
                        seen.add(key)
                        new.append((f"[{wa},{wb}]", C))
                        if len(seen) > MAX_WORDS:
                            raise RuntimeError("bracket word closure exceeded the word budget")
            by_len[ell] = sorted(new, key=lambda w: (str(w[1]), w[0]))
        current = rank_exact(rows)
        for word, X in by_len[ell]:
            n_words += 1
            vec = field_at(X, point)
            r = rank_exact(rows + [vec])
            if r > current:
                rows.append(vec)
                basis_words.append(word)
                basis_fields.append(format_operator(X))
                current = r
        ranks.append(current)
        if current == n:
            depth = ell
            ranks.extend([n] * (max_len - ell))
            break
    return BracketReport(point, max_len, depth, ranks, basis_words, basis_fields, n_words)


def depth_to_gevrey_fact(m: int) -> ThresholdFact:
    """Bracket depth m gives h(D', G{s}) for every s >= m (not sharp in general)."""
    if m < 1:
        raise ValueError("bracket depth is at least 1")
    return ThresholdFact("holds", "D'", "G{s}", f"s >= {m}",
                         f"bracket depth {m}", sharp=False)
