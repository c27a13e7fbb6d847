"""Fact text, canonical variable names and entailment between facts."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

from ..params import Zone
from ..sheaf_lattice import (FAILS, HOLDS, HypoFact, LatticeError, SheafSpace, constrain,
                             domain_zone, make_fact, parse_space, relation, validity_relations)

CANON = ("s", "t", "r", "u", "v", "w", "a", "b", "c", "d")


class FactSyntaxError(ValueError):
    pass


def split_top(text: str) -> List[str]:
    """Split on commas outside brackets."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch in "({[":
            depth += 1
        elif ch in ")}]":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return [p.strip() for p in out if p.strip()]


_HEAD = re.compile(r"^\s*(?:(not)\s+)?([A-Za-z_][A-Za-z0-9_]*)\s*(\[[^\]]*\])?\s*")


@dataclass(frozen=True)
class Statement:
    kind: str
    polarity: str
    name: str
    args: Tuple[Fraction, ...]
    spaces: Tuple[SheafSpace, ...]
    where: str


def parse_statement(text: str) -> Statement:
    """``[not] h(F, G[, H]) [for <constraints>]`` or ``[not] name[args](spaces)``."""
    body, where = text, ""
    m = re.search(r"\bfor\b", text)
    if m:
        body, where = text[:m.start()], text[m.end():].strip()
    hm = _HEAD.match(body)
    if hm is None:
        raise FactSyntaxError(f"cannot parse fact {text!r}")
    neg, name, args = hm.group(1), hm.group(2), hm.group(3)
    rest = body[hm.end():].strip()
    spaces: Tuple[SheafSpace, ...] = ()
    if rest:
        if not (rest.startswith("(") and rest.endswith(")")):
            raise FactSyntaxError(f"cannot parse fact {text!r}")
        try:
            spaces = tuple(parse_space(p) for p in split_top(rest[1:-1]))
        except (ValueError, LatticeError) as exc:
            raise FactSyntaxError(str(exc)) from exc
    nums: Tuple[Fraction, ...] = ()
    if args:
        try:
            nums = tuple(Fraction(a.strip()) for a in args[1:-1].split(",") if a.strip())
        except ValueError as exc:
            raise FactSyntaxError(f"bad property arguments in {text!r}") from exc
    polarity = FAILS if neg else HOLDS
    if name == "h":
        if args:
            raise FactSyntaxError("h() takes no bracket arguments")
        if len(spaces) == 2:
            kind = "pair"
        elif len(spaces) == 3:
            kind = "triple"
        else:
            raise FactSyntaxError(f"h() takes two or three spaces, got {len(spaces)}")
    else:
        kind = "prop"
    return Statement(kind, polarity, "" if kind != "prop" else name, nums, spaces, where)


def parse_fact(text: str, op: str = "", where: str = "", provenance=None,
               canonical: bool = True) -> HypoFact:
    """Parse fact text, optionally prefixed ``op:``."""
    m = re.match(r"^\s*([A-Za-z0-9_.\-]+)\s*:\s*(.*)$", text)
    if m and (not op or m.group(1) == op):
        op, text = m.group(1), m.group(2)
    st = parse_statement(text)
    cond = ", ".join(c for c in (st.where, where) if c)
    names = sorted({v for s in st.spaces for v in s.variables})
    try:
        zone = Zone.parse(cond, names) if cond else Zone.universe(names)
    except ValueError as exc:
        raise FactSyntaxError(str(exc)) from exc
    f = make_fact(op, st.kind, st.polarity, st.spaces, zone, st.name, st.args, provenance)
    return canonicalize(f) if canonical else f


def canonicalize(f: HypoFact) -> HypoFact:
    """Rename parameters to s, t, r, ... in order of appearance."""
    vs = f.variables
    target = CANON[:len(vs)] if len(vs) <= len(CANON) else tuple(f"v{k}" for k in range(len(vs)))
    if vs == target:
        return f
    tmp = {v: f"_{k}" for k, v in enumerate(vs)}
    fin = {f"_{k}": target[k] for k in range(len(vs))}
    spaces = tuple(s.renamed(tmp).renamed(fin) for s in f.spaces)
    zone = f.zone.rename(tmp).rename(fin)
    return HypoFact(f.op, f.kind, f.polarity, spaces, zone, f.name, f.args, f.provenance)


def with_polarity(f: HypoFact, polarity: str) -> HypoFact:
    return HypoFact(f.op, f.kind, polarity, f.spaces, f.zone, f.name, f.args, f.provenance)


@dataclass(frozen=True)
class Pattern:
    """A fact shape with free parameters, used as rule premise or query."""

    kind: str
    polarity: str
    spaces: Tuple[SheafSpace, ...]
    name: str = ""
    args: Tuple[Fraction, ...] = ()

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.kind, self.polarity, self.spaces, self.name, self.args))
            object.__setattr__(self, "_hash", h)
        return h

    @classmethod
    def parse(cls, text: str) -> "Pattern":
        st = parse_statement(text)
        if st.where:
            raise FactSyntaxError("patterns take constraints separately")
        return cls(st.kind, st.polarity, st.spaces, st.name, st.args)

    @classmethod
    def of(cls, f: HypoFact) -> "Pattern":
        return cls(f.kind, f.polarity, f.spaces, f.name, f.args)

    @property
    def group(self) -> str:
        return "h" if self.kind != "prop" else "p:" + self.name

    @property
    def variables(self) -> Tuple[str, ...]:
        out: List[str] = []
        for s in self.spaces:
            out.extend(v for v in s.variables if v not in out)
        return tuple(out)

    def well_formed_zone(self) -> Zone:
        z = domain_zone(self.spaces)
        for rel in validity_relations(self.kind, self.spaces):
            z = constrain(z, rel)
        return z

    def as_triple(self):
        if self.kind == "pair":
            return (self.spaces[0], self.spaces[1], self.spaces[1])
        return tuple(self.spaces)

    def text(self) -> str:
        f = HypoFact("", self.kind, self.polarity, self.spaces, Zone.universe(self.variables),
                     self.name, self.args)
        return f.statement()


def fact_group(f: HypoFact) -> str:
    return "h" if f.kind != "prop" else "p:" + f.name


def entailment_relations(fact_spaces, fact_kind: str, pat: Pattern, polarity: str):
    """Inclusions making the fact's instance imply the pattern's instance."""
    if pat.kind == "prop":
        if len(fact_spaces) != len(pat.spaces):
            return [False]
        rels = []
        for a, b in zip(fact_spaces, pat.spaces):
            rels += [relation(a, b), relation(b, a)]
        return rels
    F, G, H = fact_spaces if fact_kind == "triple" else (fact_spaces[0], fact_spaces[1], fact_spaces[1])
    F2, G2, H2 = pat.as_triple()
    if polarity == HOLDS:
        return [relation(F2, F), relation(G, G2), relation(H2, H)]
    return [relation(F, F2), relation(G2, G), relation(H, H2)]


@lru_cache(maxsize=500_000)
def _match(core, pat: Pattern) -> Optional[Zone]:
    _op, kind, polarity, name, args, spaces, zone = core
    if polarity != pat.polarity:
        return None
    if (kind == "prop") != (pat.kind == "prop"):
        return None
    if kind == "prop" and (name != pat.name or args != pat.args):
        return None
    mapping = {v: "f." + v for v in zone.vars}
    for s in spaces:
        for v in s.variables:
            mapping.setdefault(v, "f." + v)
    fspaces = tuple(s.renamed(mapping) for s in spaces)
    z = zone.rename(mapping).intersect(pat.well_formed_zone())
    for rel in entailment_relations(fspaces, kind, pat, polarity):
        z = constrain(z, rel)
        if z.is_empty():
            return None
    out = z.project(pat.variables)
    if out.is_empty():
        return None
    return out


def match(fact: HypoFact, pat: Pattern) -> Optional[Zone]:
    """Parameter values of the pattern whose instance the fact implies.

    A holds fact ``h(F, G, H)`` implies ``h(F', G', H')`` when F' is in F,
    G is in G' and H' is in H; a pair is the triple with G = H.  Negative
    facts propagate the other way.  ``None`` when nothing matches.
    """
    return _match(fact.core(), pat)


def entails(a: HypoFact, b: HypoFact) -> bool:
    """Every instance of ``b`` follows from ``a``."""
    if a.op != b.op:
        return False
    z = match(a, Pattern.of(b))
    if z is None:
        return b.zone.is_empty()
    return z.includes(b.zone)


def conflict_zone(h: HypoFact, f: HypoFact) -> Optional[Zone]:
    """Points where holds ``h`` implies an instance that ``f`` denies."""
    if h.op != f.op or h.polarity != HOLDS or f.polarity != FAILS:
        return None
    z = match(h, Pattern(f.kind, HOLDS, f.spaces, f.name, f.args))
    if z is None:
        return None
    z = z.intersect(f.zone)
    return None if z.is_empty() else z
