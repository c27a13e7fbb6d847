"""The rule base as guarded Horn clauses.

Each clause reads ``guards, premises, where  =>  conclusion``.  Patterns are
written ``ROLE: fact`` where ROLE is ``P`` (the operator) or ``tP`` (its
transpose).  Parameters free in the premises but absent from the
conclusion are existential; parameters of the conclusion are universal.
Biconditional groups expand to one clause per ordered pair of members and
per polarity, which is how negative facts travel through them.

Families whose shape depends on a number carried by a property (the order
of a commuting elliptic operator, the structure order of a system, a
bracket depth) are instantiated from the property arguments found among
the axioms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from ..params import Zone
from ..sheaf_lattice import FAILS, HOLDS, SheafSpace
from .facts import Pattern

ROLES = ("P", "tP")


@dataclass(frozen=True)
class Clause:
    rule: str
    premises: Tuple[Tuple[str, Pattern], ...]
    conclusion: Tuple[str, Pattern]
    where: Zone
    citation: str = ""

    @property
    def variables(self) -> Tuple[str, ...]:
        out: List[str] = []
        for _, p in self.premises + (self.conclusion,):
            out.extend(v for v in p.variables if v not in out)
        return tuple(out)

    def text(self) -> str:
        prem = ", ".join(f"{r}: {p.text()}" for r, p in self.premises)
        r, c = self.conclusion
        w = "" if not self.where.vars else f" [{self.where.text()}]"
        return f"{self.rule}: {prem}{w} => {r}: {c.text()}"


@dataclass
class Rule:
    id: str
    citation: str
    clauses: List[Clause] = field(default_factory=list)


def _pat(text: str, polarity: str = HOLDS) -> Tuple[str, Pattern]:
    role, _, body = text.partition(":")
    role = role.strip()
    if role not in ROLES:
        raise ValueError(f"bad role in {text!r}")
    p = Pattern.parse(body.strip())
    if polarity == FAILS:
        p = Pattern(p.kind, FAILS if p.polarity == HOLDS else HOLDS, p.spaces, p.name, p.args)
    return role, p


def clause(rule: str, premises: Sequence[str], conclusion: str, where: str = "",
           citation: str = "") -> Clause:
    prem = tuple(_pat(t) for t in premises)
    concl = _pat(conclusion)
    names = []
    for _, p in prem + (concl,):
        names.extend(v for v in p.variables if v not in names)
    z = Zone.parse(where, names) if where else Zone.universe(names)
    z = z.project(names) if set(z.vars) - set(names) else z
    return Clause(rule, prem, concl, z, citation)


def group(rule: str, guards: Sequence[str], members: Sequence[str], where: str = "",
          citation: str = "") -> List[Clause]:
    """All clauses of a biconditional group, both polarities."""
    out = []
    for pol in (HOLDS, FAILS):
        for i, a in enumerate(members):
            for j, b in enumerate(members):
                if i == j:
                    continue
                prem = tuple(_pat(g) for g in guards) + (_pat(a, pol),)
                concl = _pat(b, pol)
                names = []
                for _, p in prem + (concl,):
                    names.extend(v for v in p.variables if v not in names)
                z = Zone.parse(where) if where else Zone.universe()
                z = z.extend(names).project(names)
                out.append(Clause(rule, prem, concl, z, citation))
    return out


def _static_rules() -> List[Rule]:
    rules: List[Rule] = []

    r = Rule("R3", "constant coefficients: Gevrey hypoellipticity equivalences")
    r.clauses = group("R3", ["P: const_coeff"],
                      ["P: h(D'{s}, G{s})", "P: h(D', G{s})", "P: h(Cinf, G{s})",
                       "P: h(G{t}, G{s})", "P: h(D'{s}, D')", "P: h(D'{s}, Cinf)"],
                      "s > 1, t > s", r.citation)
    rules.append(r)

    r = Rule("R4", "constant coefficients: analytic hypoellipticity is ellipticity")
    r.clauses = group("R4", ["P: const_coeff"],
                      ["P: elliptic", "P: h(D', Cw)", "P: h(B, Cw)", "P: h(B, Cinf)",
                       "P: h(B, D')", "P: h(Cinf, Cw)"], "", r.citation)
    rules.append(r)

    r = Rule("R6", "tube type: Gevrey pair upgrades to ultradistributions")
    r.clauses = [
        clause("R6", ["P: tube_guards", "P: h(G{r}, G{s})"], "P: h(D'{s}, G{s})", "r > s, s > 1"),
        clause("R6c", ["P: tube_guards", "P: not h(D'{s}, G{s})"], "P: not h(G{r}, G{s})", "r > s, s > 1"),
    ]
    rules.append(r)

    r = Rule("R7", "tube type: analytic variant reaching hyperfunctions")
    r.clauses = [
        clause("R7", ["P: tube_guards", "P: h(G{r}, Cw)"], "P: h(B, Cw)", "r > 1"),
        clause("R7c", ["P: tube_guards", "P: not h(B, Cw)"], "P: not h(G{r}, Cw)", "r > 1"),
    ]
    rules.append(r)

    r = Rule("R8", "a priori L2 bound for the transpose")
    r.clauses = [
        clause("R8", ["P: in_S", "P: h(D', G{s})"], "tP: h(D'{s}, D'{r})", "s > 1, r > s"),
        clause("R8", ["P: in_S", "P: h(D', G{s})"], "tP: h(D'{s}, D')", "s > 1"),
        clause("R8b", ["P: in_S", "P: h(D', G{s})"], "P: h(D', Cinf)", "s >= 1"),
        clause("R8b", ["P: in_S", "P: h(D', G{s})"], "P: h(D', G{r})", "s >= 1, r > s"),
        clause("R8c", ["P: in_S", "P: h(D', Cw)"], "tP: h(B, L2)"),
        clause("R8c", ["P: in_S", "P: h(D', G{s})"], "tP: h(D'{s}, L2)", "s > 1"),
    ]
    rules.append(r)

    r = Rule("R9", "sums of squares satisfying the bracket condition")
    prem = ["P: hormander", "P: h(D', G{s})", "tP: h(D', G{s})"]
    r.clauses = []
    for role in ROLES:
        r.clauses += [
            clause("R9", prem, f"{role}: h(D'{{s}}, G{{r}})", "s > 1, r >= s"),
            clause("R9", prem, f"{role}: h(D'{{s}}, Cinf)", "s > 1"),
            clause("R9", prem, f"{role}: h(D'{{s}}, D')", "s > 1"),
            clause("R9", prem, f"{role}: h(D'{{s}}, D'{{r}})", "s > 1, r > s"),
        ]
    r.clauses += [
        clause("R9s", ["P: hormander"], "P: in_S"),
        clause("R9t", ["P: hormander"], "tP: hormander"),
    ]
    rules.append(r)

    r = Rule("R10", "solvability of the transpose")
    r.clauses = [
        clause("R10h", ["P: nondegenerate"], "P: no_delta"),
        clause("R10", ["P: no_delta", "P: h(D'({s}), D')"], "tP: locally_solvable", "s > 1"),
        clause("R10c", ["P: no_delta", "tP: not locally_solvable"], "P: not h(D'({s}), D')", "s > 1"),
    ]
    rules.append(r)
    return rules


STATIC_RULES: List[Rule] = _static_rules()


def _p(x: Fraction) -> str:
    """Offset text for a space parameter."""
    x = Fraction(x)
    return f"+{x}" if x >= 0 else f"-{-x}"


def rules_for_order(m: Fraction) -> List[Clause]:
    """Sobolev shifting for an operator commuting with an elliptic one of order m."""
    m = Fraction(m)
    g = f"P: commutes_elliptic[{m}]"
    out = []
    for k in range(-4, 5):
        if k == 0:
            continue
        d = _p(k * m)
        for neg in ("", "not "):
            out.append(clause("R5", [g, f"P: {neg}h(H{{r}}, H{{t}})"], f"P: {neg}h(H{{r{d}}}, H{{t{d}}})"))
            out.append(clause("R5", [g, f"P: {neg}h(H{{r}}, H{{t}}, Cinf)"],
                              f"P: {neg}h(H{{r{d}}}, H{{t{d}}}, Cinf)"))
    out += [
        clause("R5a", [g, "P: h(H{r}, H{t}, Cinf)"], "P: h(D', Cinf)", f"t - r >= {m}"),
        clause("R5a", [g, "P: h(D', H{t}, Cinf)"], "P: h(D', Cinf)"),
        clause("R5b", [g, "P: h(D', Cinf)"], f"P: h(H{{r}}, H{{r{_p(m)}}}, Cinf)"),
        clause("R5n", [g, "P: not h(D', Cinf)"], "P: not h(H{r}, H{t}, Cinf)", f"t - r >= {m}"),
        clause("R5n", [g, "P: not h(D', Cinf)"], "P: not h(D', H{t}, Cinf)"),
    ]
    return out


def rules_for_system(s0: Fraction) -> List[Clause]:
    """Equivalences for a system whose structure is of Gevrey order s0."""
    s0 = Fraction(s0)
    g = f"P: system[{s0}]"
    where = f"a >= {s0}, s > a"
    base = ["P: h(D'{s}, G{a})", "P: h(D', G{a})", "P: h(Cinf, G{a})", "P: h(G{s}, G{a})"]
    out = group("R12", [g], base, where)
    out += group("R12", [g, "P: locally_solvable"], base + ["P: h(D'{s}, D')", "P: h(D'{s}, Cinf)"], where)
    # drop the clauses already produced by the first group
    seen = set()
    uniq = []
    for c in out:
        key = (c.premises[-1], c.conclusion, c.where)
        if key in seen:
            continue
        seen.add(key)
        uniq.append(c)
    return uniq


def rules_for_depth(m: Fraction) -> List[Clause]:
    """Bracket depth m: h(D', G{s}) for s >= max(m, 1), not sharp in general."""
    m = Fraction(m)
    lo = max(m, Fraction(1))
    g = ["P: hormander", f"P: bracket_depth[{m}]"]
    return [clause("Rdepth", g, f"{role}: h(D', G{{s}})", f"s >= {lo}") for role in ROLES]


FAMILIES: Dict[str, Callable[[Fraction], List[Clause]]] = {
    "commutes_elliptic": rules_for_order,
    "system": rules_for_system,
    "bracket_depth": rules_for_depth,
}


def all_rule_ids() -> List[str]:
    return ["R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "R9", "R10", "R11", "R12"]
