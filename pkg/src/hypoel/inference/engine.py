"""Semi-naive forward chaining over parametric facts, with proof traces."""

from __future__ import annotations

import random
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from ..params import Interval, IntervalSet, Zone
from ..sheaf_lattice import (FAILS, HOLDS, HypoFact, LatticeError, constrain, domain_zone,
                             make_fact, relation, relation_holds_on, validity_relations)
from .facts import (Pattern, canonicalize, conflict_zone, entails, fact_group, match,
                    parse_fact, parse_statement)
from .rules import FAMILIES, STATIC_RULES, Clause

MAX_ROUNDS = 200
# derived space parameters beyond this offset are discarded; composition of
# Sobolev pairs could otherwise grow offsets without bound
OFFSET_LIMIT = 32
REFLEXIVE = -1


class UnknownOperatorError(KeyError):
    pass


class InconsistentAxiomsError(ValueError):
    def __init__(self, contradictions):
        self.contradictions = contradictions
        super().__init__(f"{len(contradictions)} holds/fails contradiction(s)")


@dataclass(frozen=True)
class Derivation:
    rule: str
    premises: Tuple[int, ...]
    clause: Optional[Clause] = None
    source: str = ""                 # citation or "computed: ..." for axioms


@dataclass
class ProofTrace:
    fact: HypoFact
    rule: str
    source: str
    premises: List["ProofTrace"]

    def to_dict(self) -> dict:
        d = {"fact": self.fact.text(with_op=True), "rule": self.rule}
        if self.source:
            d["source"] = self.source
        if self.premises:
            d["premises"] = [p.to_dict() for p in self.premises]
        return d

    def rules_used(self) -> List[str]:
        out = [self.rule]
        for p in self.premises:
            out += p.rules_used()
        return out

    def lines(self, indent: int = 0) -> List[str]:
        tag = self.rule if self.rule != "axiom" else f"axiom: {self.source}"
        out = ["  " * indent + f"{self.fact.text(with_op=True)}  [{tag}]"]
        for p in self.premises:
            out += p.lines(indent + 1)
        return out


@dataclass
class Contradiction:
    holds_id: int
    fails_id: int
    zone: Zone


class Closure:
    """The fixed point of a derivation run.  Read-only once built."""

    def __init__(self, operators: Iterable[str], transposes: Mapping[str, str]):
        self.operators = set(operators)
        self.transposes = dict(transposes)
        self.facts: List[HypoFact] = []
        self.derivations: List[Derivation] = []
        self.contradictions: List[Contradiction] = []
        self.rounds = 0
        self._index: Dict[Tuple[str, str, str], List[int]] = {}
        self._keys: Dict[tuple, int] = {}
        self._memo: Dict[Tuple[int, int], Optional[Zone]] = {}

    def match(self, i: int, pat: Pattern) -> Optional[Zone]:
        key = (i, id(pat))
        try:
            return self._memo[key]
        except KeyError:
            z = self._memo[key] = match(self.facts[i], pat)
            return z

    # store
    def bucket(self, op: str, group: str, polarity: str) -> List[int]:
        return self._index.get((op, group, polarity), [])

    def _subsumed(self, f: HypoFact) -> bool:
        if f.core() in self._keys:
            return True
        for i in self.bucket(f.op, fact_group(f), f.polarity):
            if entails(self.facts[i], f):
                return True
        return False

    def _add(self, f: HypoFact, d: Derivation) -> Optional[int]:
        if f.zone.is_empty() or self._subsumed(f):
            return None
        idx = len(self.facts)
        self.facts.append(f)
        self.derivations.append(d)
        self._keys[f.core()] = idx
        self._index.setdefault((f.op, fact_group(f), f.polarity), []).append(idx)
        return idx

    # views
    def trace(self, idx: int) -> ProofTrace:
        d = self.derivations[idx]
        return ProofTrace(self.facts[idx], d.rule, d.source, [self.trace(p) for p in d.premises])

    def axioms(self) -> List[int]:
        return [i for i, d in enumerate(self.derivations) if d.rule == "axiom"]

    def derived(self) -> List[int]:
        return [i for i, d in enumerate(self.derivations) if d.rule != "axiom"]

    def facts_for(self, op: str) -> List[HypoFact]:
        return [f for f in self.facts if f.op == op]

    def reduced(self) -> frozenset:
        """Canonical content: facts not implied by a different stored fact."""
        keep = []
        for i, f in enumerate(self.facts):
            dominated = False
            for j in self.bucket(f.op, fact_group(f), f.polarity):
                if j == i:
                    continue
                g = self.facts[j]
                if entails(g, f) and (not entails(f, g) or g.core() < f.core()):
                    dominated = True
                    break
            if not dominated:
                keep.append(f.core())
        return frozenset(keep)

    def covers(self, f: HypoFact) -> bool:
        """Every instance of ``f`` follows from the stored facts."""
        pat = Pattern.of(f)
        zones = []
        for i in self.bucket(f.op, fact_group(f), f.polarity):
            m = match(self.facts[i], pat)
            if m is not None:
                zones.append(m)
        return _covers(zones, f.zone, pat.variables)

    def same_content(self, other: "Closure") -> bool:
        """Both closures imply exactly the same instances."""
        return (all(other.covers(f) for f in self.facts)
                and all(self.covers(f) for f in other.facts))


# rule application

@lru_cache(maxsize=200_000)
def _conclude(clause: Clause, op: str, zone: Zone) -> Optional[HypoFact]:
    _, pat = clause.conclusion
    z = domain_zone(pat.spaces, zone.project(pat.variables))
    if z.is_empty():
        return None
    for s in pat.spaces:
        if s.param is not None and abs(s.param.offset) > OFFSET_LIMIT:
            return None
    for rel in validity_relations(pat.kind, pat.spaces):
        if not relation_holds_on(z, rel):
            raise AssertionError(f"{clause.rule} would derive an ill-formed fact {pat.text()} on {z.text()}")
    f = HypoFact(op, pat.kind, pat.polarity, pat.spaces, z, pat.name, pat.args)
    return canonicalize(f)


@dataclass(frozen=True)
class _Bound:
    """A clause with concrete operator ids for each premise and the conclusion."""

    clause: Clause
    ops: Tuple[str, ...]
    concl_op: str


@lru_cache(maxsize=4096)
def _bind_one(clauses: Tuple[Clause, ...], op: str, top: Optional[str]) -> Tuple[_Bound, ...]:
    roles = {"P": op, "tP": top}
    out = []
    for c in clauses:
        ops = tuple(roles[r] for r, _ in c.premises)
        cop = roles[c.conclusion[0]]
        if cop is None or any(o is None for o in ops):
            continue
        out.append(_Bound(c, ops, cop))
    return tuple(out)


def _bind(clause_sets: Sequence[Tuple[Clause, ...]], operators: Iterable[str],
          transposes: Mapping[str, str]) -> List[_Bound]:
    out: List[_Bound] = []
    for op in sorted(operators):
        for cs in clause_sets:
            out.extend(_bind_one(cs, op, transposes.get(op)))
    return out


def _apply_bound(b: _Bound, facts: Sequence[HypoFact]) -> Optional[HypoFact]:
    z = b.clause.where
    for (_, pat), f in zip(b.clause.premises, facts):
        m = match(f, pat)
        if m is None:
            return None
        z = z.intersect(m)
        if z.is_empty():
            return None
    return _conclude(b.clause, b.concl_op, z)


def _compose(f1: HypoFact, f2: HypoFact) -> Optional[HypoFact]:
    """h(F, G) and h(G', H) with H in G in G' give h(F, H)."""
    if f1.kind != "pair" or f2.kind != "pair" or f1.op != f2.op:
        return None
    return _compose_core(f1.core(), f2.core())


@lru_cache(maxsize=200_000)
def _compose_core(c1, c2) -> Optional[HypoFact]:
    f1 = HypoFact(c1[0], c1[1], c1[2], c1[5], c1[6], c1[3], c1[4])
    f2 = HypoFact(c2[0], c2[1], c2[2], c2[5], c2[6], c2[3], c2[4])
    if f1.kind != "pair" or f2.kind != "pair" or f1.polarity != HOLDS or f2.polarity != HOLDS:
        return None
    if f1.op != f2.op:
        return None
    ma = {v: "a" + v for v in f1.variables}
    mb = {v: "b" + v for v in f2.variables}
    F, G = (s.renamed(ma) for s in f1.spaces)
    G2, H = (s.renamed(mb) for s in f2.spaces)
    z = f1.zone.rename(ma).intersect(f2.zone.rename(mb))
    for rel in (relation(G, G2), relation(H, G)):
        z = constrain(z, rel)
        if z.is_empty():
            return None
    keep = sorted(set(F.variables) | set(H.variables))
    z = domain_zone([F, H], z.project(keep))
    if z.is_empty():
        return None
    for s in (F, H):
        if s.param is not None and abs(s.param.offset) > OFFSET_LIMIT:
            return None
    if not relation_holds_on(z, relation(H, F)):
        raise AssertionError("composition produced an ill-formed pair")
    return canonicalize(HypoFact(f1.op, "pair", HOLDS, (F, H), z))


def _kernel_bridge(k: HypoFact, s: HypoFact) -> Optional[HypoFact]:
    """kernel_in(F, G) and locally_solvable_wrt(G) give h(F, G)."""
    if k.op != s.op or k.polarity != HOLDS or s.polarity != HOLDS:
        return None
    if len(k.spaces) != 2 or len(s.spaces) != 1:
        return None
    ma = {v: "a" + v for v in k.variables}
    mb = {v: "b" + v for v in s.variables}
    F, G = (x.renamed(ma) for x in k.spaces)
    (G2,) = (x.renamed(mb) for x in s.spaces)
    z = k.zone.rename(ma).intersect(s.zone.rename(mb))
    for rel in (relation(G, G2), relation(G2, G)):
        z = constrain(z, rel)
        if z.is_empty():
            return None
    keep = sorted(set(F.variables) | set(G.variables))
    z = domain_zone([F, G], z.project(keep))
    if z.is_empty() or not relation_holds_on(z, relation(G, F)):
        return None
    return canonicalize(HypoFact(k.op, "pair", HOLDS, (F, G), z))


def _family_keys(axioms: Sequence[HypoFact]) -> set:
    """Rule families requested by property arguments among the axioms."""
    return {(f.name, f.args[0]) for f in axioms
            if f.kind == "prop" and f.name in FAMILIES and f.args and f.polarity == HOLDS}


@lru_cache(maxsize=4096)
def _plan(ops: Tuple[str, ...], transposes: Tuple[Tuple[str, str], ...], fams):
    """Bound clauses, their premise keys, and which clauses a new fact can wake up."""
    sets = [_STATIC] + [_family(*k) for k in fams]
    bound = _bind(sets, ops, dict(transposes))
    keys = [tuple((op, pat.group, pat.polarity) for (_, pat), op in zip(b.clause.premises, b.ops))
            for b in bound]
    triggers: Dict[Tuple[str, str, str], List[int]] = {}
    for n, ks in enumerate(keys):
        for k in set(ks):
            triggers.setdefault(k, []).append(n)
    return bound, keys, triggers


@lru_cache(maxsize=None)
def _family(name: str, arg: Fraction) -> Tuple[Clause, ...]:
    return tuple(FAMILIES[name](arg))


_STATIC: Tuple[Clause, ...] = tuple(c for r in STATIC_RULES for c in r.clauses)


def derive(axioms: Iterable[Union[HypoFact, Tuple[HypoFact, str]]],
           transposes: Optional[Mapping[str, str]] = None,
           operators: Iterable[str] = (),
           rule_order_seed: Optional[int] = None,
           max_rounds: int = MAX_ROUNDS,
           strict: bool = False) -> Closure:
    """Least fixed point of the rule base over the axioms.

    ``axioms`` holds facts or ``(fact, source)`` pairs.  ``transposes`` maps
    an operator id to the id of its transpose.  With ``strict`` a holds/fails
    conflict raises :class:`InconsistentAxiomsError`.
    """
    items = []
    for a in axioms:
        f, src = (a if isinstance(a, tuple) else (a, getattr(a, "provenance", "") or "axiom"))
        items.append((canonicalize(f), str(src)))
    transposes = dict(transposes or {})
    ops = set(operators) | {f.op for f, _ in items}
    for a, b in list(transposes.items()):
        ops.add(b)
    cl = Closure(ops, transposes)

    fams = tuple(sorted(_family_keys([f for f, _ in items])))
    bound, bound_keys, triggers = _plan(tuple(sorted(ops)), tuple(sorted(transposes.items())), fams)
    rank = list(range(len(bound)))
    if rule_order_seed is not None:
        rng = random.Random(rule_order_seed)
        rng.shuffle(rank)
        rng.shuffle(items)

    delta = []
    for f, src in items:
        i = cl._add(f, Derivation("axiom", (), None, src))
        if i is not None:
            delta.append(i)

    rounds = 0
    while delta:
        rounds += 1
        if rounds > max_rounds:
            raise AssertionError(f"no fixed point after {max_rounds} rounds")
        delta_set = set(delta)
        produced: List[Tuple[HypoFact, Derivation]] = []
        hit = set()
        for i in delta:
            f = cl.facts[i]
            hit.update(triggers.get((f.op, fact_group(f), f.polarity), ()))
        for n in sorted(hit, key=rank.__getitem__):
            b, keys = bound[n], bound_keys[n]
            cands = [cl.bucket(*k) for k in keys]
            if all(cands):
                _search(cl, b, cands, delta_set, produced)
        produced += _code_rules(cl, delta_set)
        delta = []
        for f, d in produced:
            i = cl._add(f, d)
            if i is not None:
                delta.append(i)
    cl.rounds = rounds
    cl.contradictions = find_contradictions(cl)
    if strict and cl.contradictions:
        raise InconsistentAxiomsError(cl.contradictions)
    return cl


def _search(cl: Closure, b: _Bound, cands: List[List[int]], delta: set, out: list) -> None:
    n = len(cands)
    pats = [p for _, p in b.clause.premises]

    def rec(k: int, z: Zone, chosen: List[int], used_delta: bool):
        if k == n:
            if not used_delta:
                return
            f = _conclude(b.clause, b.concl_op, z)
            if f is not None:
                out.append((f, Derivation(b.clause.rule, tuple(chosen), b.clause)))
            return
        for i in cands[k]:
            m = cl.match(i, pats[k])
            if m is None:
                continue
            z2 = z.intersect(m)
            if z2.is_empty():
                continue
            rec(k + 1, z2, chosen + [i], used_delta or i in delta)

    rec(0, b.clause.where, [], False)


def _code_rules(cl: Closure, delta: set) -> List[Tuple[HypoFact, Derivation]]:
    out = []
    for op in sorted(cl.operators):
        pairs = [i for i in cl.bucket(op, "h", HOLDS) if cl.facts[i].kind == "pair"]
        for i in pairs:
            for j in pairs:
                if i == j or (i not in delta and j not in delta):
                    continue
                f = _compose(cl.facts[i], cl.facts[j])
                if f is not None:
                    out.append((f, Derivation("R1", (i, j))))
        kern = cl.bucket(op, "p:kernel_in", HOLDS)
        solv = cl.bucket(op, "p:locally_solvable_wrt", HOLDS)
        for i in kern:
            for j in solv:
                if i not in delta and j not in delta:
                    continue
                f = _kernel_bridge(cl.facts[i], cl.facts[j])
                if f is not None:
                    out.append((f, Derivation("R11", (i, j))))
    return out


def find_contradictions(cl: Closure) -> List[Contradiction]:
    out = []
    for (op, group, pol), ids in sorted(cl._index.items()):
        if pol != HOLDS:
            continue
        for i in ids:
            for j in cl.bucket(op, group, FAILS):
                z = conflict_zone(cl.facts[i], cl.facts[j])
                if z is not None:
                    out.append(Contradiction(i, j, z))
    return out


# replay

def replay(cl: Closure, idx: int) -> bool:
    """Re-run the recorded rule on the recorded premises."""
    d = cl.derivations[idx]
    f = cl.facts[idx]
    if d.rule == "axiom":
        return True
    prem = [cl.facts[i] for i in d.premises]
    if any(p >= idx for p in d.premises):
        return False
    if d.rule == "R1":
        g = _compose(*prem)
    elif d.rule == "R11":
        g = _kernel_bridge(*prem)
    else:
        b = _Bound(d.clause, tuple(p.op for p in prem), f.op)
        g = _apply_bound(b, prem)
    return g is not None and g.core() == f.core()


def replay_all(cl: Closure) -> Tuple[int, int]:
    ids = cl.derived()
    ok = sum(1 for i in ids if replay(cl, i))
    return ok, len(ids)


# queries

@dataclass
class Answer:
    op: str
    question: str
    status: str                       # holds | fails | unknown | mixed | contradiction
    variables: Tuple[str, ...]
    holds: List[Zone] = field(default_factory=list)
    fails: List[Zone] = field(default_factory=list)
    holds_ids: List[int] = field(default_factory=list)
    fails_ids: List[int] = field(default_factory=list)
    domain: Optional[Zone] = None

    def region(self, polarity: str = HOLDS) -> IntervalSet:
        """Union of matching zones, for one-parameter questions."""
        if len(self.variables) != 1:
            raise ValueError("interval view needs exactly one parameter")
        v = self.variables[0]
        zs = self.holds if polarity == HOLDS else self.fails
        out = IntervalSet()
        for z in zs:
            out = out.union(IntervalSet.from_zone(z, v))
        return out

    def to_dict(self, closure: Optional["Closure"] = None) -> dict:
        d = {"operator": self.op, "question": self.question, "answer": self.status}
        if self.variables:
            if len(self.variables) == 1:
                d["holds_region"] = str(self.region(HOLDS))
                d["fails_region"] = str(self.region(FAILS))
            else:
                d["holds_region"] = [z.text() for z in self.holds]
                d["fails_region"] = [z.text() for z in self.fails]
        if closure is not None:
            d["holds_traces"] = [_trace_dict(closure, i) for i in self.holds_ids]
            d["fails_traces"] = [_trace_dict(closure, i) for i in self.fails_ids]
        return d


def _trace_dict(cl: "Closure", i: int) -> dict:
    if i == REFLEXIVE:
        return {"fact": "the two spaces coincide", "rule": "reflexive"}
    return cl.trace(i).to_dict()


def _covers(zones: List[Zone], dom: Zone, variables: Tuple[str, ...]) -> bool:
    if not zones:
        return False
    if any(z.includes(dom) for z in zones):
        return True
    if len(variables) == 1:
        v = variables[0]
        u = IntervalSet()
        for z in zones:
            u = u.union(IntervalSet.from_zone(z, v))
        d = IntervalSet.from_zone(dom, v)
        return u.intersect(d) == d
    return False


def query(cl: Closure, op: str, question: Union[str, Pattern], where: str = "") -> Answer:
    """Interval-aware lookup of ``question`` among the closed facts of ``op``."""
    if op not in cl.operators:
        raise UnknownOperatorError(op)
    if isinstance(question, str):
        st = parse_statement(question)
        pat = Pattern(st.kind, HOLDS, st.spaces, st.name, st.args)
        where = ", ".join(w for w in (st.where, where) if w)
        qtext = question
    else:
        pat = Pattern(question.kind, HOLDS, question.spaces, question.name, question.args)
        qtext = question.text()
    dom = pat.well_formed_zone()
    if where:
        dom = dom.intersect(Zone.parse(where, pat.variables))
    variables = pat.variables
    neg = Pattern(pat.kind, FAILS, pat.spaces, pat.name, pat.args)
    ans = Answer(op, qtext, "unknown", variables, domain=dom)
    if pat.kind != "prop":
        # u in F and Pu in G already give u in G when F and G coincide
        z = dom
        for rel in (relation(pat.spaces[0], pat.spaces[1]), relation(pat.spaces[1], pat.spaces[0])):
            z = constrain(z, rel)
        if not z.is_empty():
            ans.holds.append(z)
            ans.holds_ids.append(REFLEXIVE)
    for p, zs, ids in ((pat, ans.holds, ans.holds_ids), (neg, ans.fails, ans.fails_ids)):
        for i in cl.bucket(op, p.group, p.polarity):
            m = match(cl.facts[i], p)
            if m is None:
                continue
            m = m.intersect(dom)
            if m.is_empty():
                continue
            zs.append(m)
            ids.append(i)
    h_all = _covers(ans.holds, dom, variables)
    f_all = _covers(ans.fails, dom, variables)
    if ans.holds and ans.fails:
        overlap = any(not a.intersect(b).is_empty() for a in ans.holds for b in ans.fails)
        ans.status = "contradiction" if overlap else "mixed"
    elif h_all:
        ans.status = HOLDS
    elif f_all:
        ans.status = FAILS
    elif ans.holds or ans.fails:
        ans.status = "mixed"
    return ans
