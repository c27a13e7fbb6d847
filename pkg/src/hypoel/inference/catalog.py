"""Built-in example operators with cited facts and computed guards.

Each entry ships cited seed facts and expected answers.  At load time the
computational modules check what they can (constant coefficients,
ellipticity, tube structure, nondegeneracy, bracket rank, commuting
elliptic operators, first integrals, irregularity) and every guard
records how it is supported:

* ``computed``     a computation confirms it (with or without a citation),
* ``cited``        only a citation supports it,
* ``contradicted`` a citation and a computation disagree; the guard is
  then withheld from the engine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..brackets import hormander_depth
from ..irregularity import irregularity, irregularity_thresholds, sharpness_fact
from ..operator_core import (DiffOperator, OperatorSystem, apply, commutes, parse_coeff,
                             parse_operator, transpose)
from ..sheaf_lattice import FAILS, HOLDS, HypoFact, LatticeError
from ..symbol_analysis import is_elliptic, nondegenerate_at, tube_decompose
from .engine import Closure, derive, query
from .facts import FactSyntaxError, parse_fact


class CatalogError(ValueError):
    pass


@dataclass
class Guard:
    prop: str                     # e.g. "hormander", "commutes_elliptic[2]"
    polarity: str
    level: str                    # computed | cited | contradicted
    source: str
    evidence: str = ""

    def to_dict(self) -> dict:
        return {"prop": self.prop, "polarity": self.polarity, "level": self.level,
                "source": self.source, "evidence": self.evidence}


@dataclass
class Expectation:
    question: str
    answer: Optional[str] = None
    holds: Optional[str] = None
    fails: Optional[str] = None
    rule: Optional[str] = None


@dataclass
class CatalogEntry:
    id: str
    name: str
    operator: Optional[DiffOperator]
    system: Optional[OperatorSystem]
    transpose_id: Optional[str]
    seeds: List[Tuple[HypoFact, str]]
    guards: List[Guard]
    expect: List[Expectation]
    raw: dict = field(default_factory=dict, repr=False)

    def axioms(self) -> List[Tuple[HypoFact, str]]:
        out = list(self.seeds)
        for g in self.guards:
            if g.level == "contradicted":
                continue
            neg = "not " if g.polarity == FAILS else ""
            label = g.level if g.source == g.level else f"{g.level}: {g.source}"
            out.append((parse_fact(neg + g.prop, op=self.id), label))
        return out

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "operator": self.raw.get("operator"),
            "transpose": self.transpose_id,
            "seeds": [{"fact": f.text(), "source": s} for f, s in self.seeds],
            "guards": [g.to_dict() for g in self.guards],
        }


def _point(raw: dict, variables: Sequence[str]) -> Dict[str, Fraction]:
    pt = {v: Fraction(0) for v in variables}
    for k, v in (raw.get("point") or {}).items():
        pt[k] = Fraction(v)
    return pt


def _region(box: Optional[Mapping[str, Sequence[str]]]):
    if not box:
        return None
    return {k: (float(Fraction(a)), float(Fraction(b))) for k, (a, b) in box.items()}


def _merge(guards: List[Guard], prop: str, polarity: str, evidence: str,
           computed_source: str = "computed") -> None:
    """Fold a computed verdict into an existing cited guard, or add it."""
    for g in guards:
        if g.prop == prop:
            if g.polarity == polarity:
                g.level = "computed"
                g.evidence = evidence
            else:
                g.level = "contradicted"
                g.evidence = f"computation gives {polarity}: {evidence}"
            return
    guards.append(Guard(prop, polarity, "computed", computed_source, evidence))


def _principal_sum_of_squares(P: DiffOperator, fields: Sequence[DiffOperator]) -> bool:
    Q = DiffOperator.zero(P.variables)
    for X in fields:
        Xv = X.with_variables(P.variables)
        Q = Q + Xv * Xv
    return Q.order() == P.order() and Q.top_order_terms() == P.top_order_terms()


def load_entry(raw: dict, fast: bool = False) -> CatalogEntry:
    eid = raw["id"]
    variables = raw.get("variables") or None
    P = None
    if raw.get("operator"):
        P = parse_operator(raw["operator"], variables)
    system = None
    if raw.get("system"):
        s = raw["system"]
        fields = [parse_operator(f, variables) for f in s["fields"]]
        system = OperatorSystem(fields, [parse_coeff(z, variables) for z in s.get("first_integrals", [])],
                                variables)
    tid = raw.get("transpose")
    if tid == "self":
        tid = eid

    seeds = []
    for sd in raw.get("seeds", []):
        try:
            seeds.append((parse_fact(sd["fact"], op=eid), sd["source"]))
        except (FactSyntaxError, LatticeError, ValueError) as exc:
            raise CatalogError(f"{eid}: bad seed {sd['fact']!r}: {exc}") from exc

    guards: List[Guard] = []
    for pr in raw.get("props", []):
        text = pr["prop"].strip()
        pol = FAILS if text.startswith("not ") else HOLDS
        guards.append(Guard(text[4:].strip() if pol == FAILS else text, pol, "cited", pr["source"]))

    if P is not None:
        const = P.has_constant_coefficients()
        _merge(guards, "const_coeff", HOLDS if const else FAILS, "coefficients inspected exactly")
        if const:
            rep = is_elliptic(P)
            if rep.verdict != "inconclusive":
                pol = HOLDS if rep.verdict == "elliptic" else FAILS
                _merge(guards, "elliptic", pol, f"principal symbol margin {rep.margin:.3g}")
        pt = _point(raw, P.variables)
        try:
            nd = nondegenerate_at(P, pt)
            _merge(guards, "nondegenerate", HOLDS if nd else FAILS,
                   "top-order coefficients at " + ", ".join(f"{k}={v}" for k, v in pt.items()))
        except ValueError:
            pass
        if raw.get("tube"):
            td = tube_decompose(P, raw["tube"])
            ok = td is not None and td.guards_satisfied
            ev = "no tube splitting" if td is None else (
                f"P0 = {td.P0}, elliptic={td.p0_elliptic}, same order={td.same_order}")
            _merge(guards, "tube_guards", HOLDS if ok else FAILS, ev)
        if raw.get("hormander_fields"):
            fields = [parse_operator(f, P.variables) for f in raw["hormander_fields"]]
            rep = hormander_depth(fields, _point(raw, P.variables))
            squares = _principal_sum_of_squares(P, fields)
            if rep.depth is not None and squares:
                _merge(guards, "hormander", HOLDS, f"bracket rank full at depth {rep.depth}")
                guards.append(Guard(f"bracket_depth[{rep.depth}]", HOLDS, "computed", "computed",
                                    "rank sequence " + ",".join(map(str, rep.ranks))))
            elif not squares:
                _merge(guards, "hormander", FAILS, "principal part is not the sum of squares")
        if raw.get("commuting_elliptic"):
            ce = raw["commuting_elliptic"]
            Q = parse_operator(ce["operator"], P.variables)
            m = Fraction(ce["order"])
            ok = commutes(P, Q) and Q.order() == m
            ev = "commutator vanishes" if ok else "commutator is nonzero or order differs"
            if ok and not fast:
                rep = is_elliptic(Q, _region(ce.get("region")))
                ok = rep.verdict == "elliptic"
                ev += f"; ellipticity {rep.verdict} (margin {rep.margin:.3g})"
            level = "computed" if ok else "contradicted"
            guards.append(Guard(f"commutes_elliptic[{m}]", HOLDS, level, ce["operator"], ev))
        if tid is not None and tid == eid:
            T = transpose(P)
            if T != P and T != -P:
                raise CatalogError(f"{eid}: declared self-transpose but transpose is {T}")
        if raw.get("irregularity"):
            rep = irregularity(P, 0)
            if not rep.exact:
                raise CatalogError(f"{eid}: irregularity is only bounded, not computed")
            for tf in irregularity_thresholds(rep.sigma):
                seeds.append((parse_fact(tf.text(), op=eid), f"computed: irregularity {rep.sigma} at 0"))
        if raw.get("kernel_witness"):
            kw = raw["kernel_witness"]
            u = parse_coeff(kw["function"], P.variables)
            if not apply(P, u).is_zero():
                raise CatalogError(f"{eid}: {kw['function']} is not in the kernel")
            g = Fraction(kw["gevrey"])
            k = 1 / (g - 1)
            if k.denominator != 1:
                raise CatalogError(f"{eid}: kernel order must be 1 + 1/k")
            tf = sharpness_fact(int(k))
            seeds.append((parse_fact(tf.text(), op=eid),
                          f"computed: {kw['function']} solves Pu = 0 and is Gevrey {g} but not analytic"))
    if system is not None:
        ok = system.first_integrals_ok()
        s0 = Fraction(raw["system"].get("structure_order", "1"))
        guards.append(Guard(f"system[{s0}]", HOLDS, "computed" if ok else "contradicted",
                            "locally integrable structure",
                            "first integrals annihilated" if ok else "a first integral is not annihilated"))

    expect = [Expectation(e["question"], e.get("answer"), e.get("holds"), e.get("fails"), e.get("rule"))
              for e in raw.get("expect", [])]
    return CatalogEntry(eid, raw.get("name", eid), P, system, tid, seeds, guards, expect, raw)


def _raw_catalog() -> List[dict]:
    text = resources.files("hypoel").joinpath("data/catalog.json").read_text(encoding="utf-8")
    return json.loads(text)["entries"]


@lru_cache(maxsize=None)
def _catalog_cached() -> Tuple[CatalogEntry, ...]:
    return tuple(load_entry(r) for r in _raw_catalog())


def catalog(path: Optional[str] = None) -> List[CatalogEntry]:
    """Load the built-in catalog, or one from a JSON file with the same layout."""
    if path is None:
        return list(_catalog_cached())
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return [load_entry(r) for r in data.get("entries", [])]


def get_entry(name: str, entries: Optional[Sequence[CatalogEntry]] = None) -> Optional[CatalogEntry]:
    for e in entries if entries is not None else catalog():
        if e.id == name:
            return e
    return None


def catalog_axioms(entries: Iterable[CatalogEntry]):
    entries = list(entries)
    axioms = []
    transposes = {}
    for e in entries:
        axioms.extend(e.axioms())
        if e.transpose_id is not None:
            transposes[e.id] = e.transpose_id
    return axioms, transposes, [e.id for e in entries]


def derive_catalog(entries: Optional[Sequence[CatalogEntry]] = None, **kw) -> Closure:
    entries = list(entries) if entries is not None else catalog()
    axioms, transposes, ops = catalog_axioms(entries)
    return derive(axioms, transposes, operators=ops, **kw)


@lru_cache(maxsize=None)
def catalog_closure() -> Closure:
    return derive_catalog()


@dataclass
class RegressionResult:
    entry: str
    question: str
    passed: bool
    expected: str
    got: str


def check_expectation(cl: Closure, entry: str, ex: Expectation) -> RegressionResult:
    ans = query(cl, entry, ex.question)
    problems = []
    got = [ans.status]
    if ex.answer is not None and ans.status != ex.answer:
        problems.append("answer")
    if ex.holds is not None or ex.fails is not None:
        h, f = str(ans.region(HOLDS)), str(ans.region(FAILS))
        got = [f"holds {h}", f"fails {f}"]
        if ex.holds is not None and h != ex.holds:
            problems.append("holds region")
        if ex.fails is not None and f != ex.fails:
            problems.append("fails region")
    if ex.rule is not None:
        used = set()
        for i in ans.holds_ids + ans.fails_ids:
            if i >= 0:
                used.update(cl.trace(i).rules_used())
        if ex.rule not in used:
            problems.append(f"rule {ex.rule} not in trace")
        got.append("rules " + ",".join(sorted(used)))
    exp = [x for x in (ex.answer, ex.holds and f"holds {ex.holds}", ex.fails and f"fails {ex.fails}",
                       ex.rule and f"via {ex.rule}") if x]
    return RegressionResult(entry, ex.question, not problems, "; ".join(exp), "; ".join(got))


def regress(entries: Optional[Sequence[CatalogEntry]] = None) -> List[RegressionResult]:
    cl = None if entries is not None else catalog_closure()
    entries = list(entries) if entries is not None else catalog()
    if not entries:
        raise CatalogError("empty catalog")
    cl = cl or derive_catalog(entries)
    out = []
    for e in entries:
        for ex in e.expect:
            out.append(check_expectation(cl, e.id, ex))
    return out
