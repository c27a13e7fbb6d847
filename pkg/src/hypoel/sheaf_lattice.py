"""Space descriptors, their inclusion order, and hypoellipticity facts.

Spaces carry at most one affine parameter ``var + offset``.  For a pair of
descriptors, :func:`relation` reduces ``A`` contained in ``B`` to ``True``,
``False`` or a single difference constraint on the parameters, so every
question the inference engine asks stays inside :class:`~hypoel.params.Zone`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .params import Atom, Zone

Relation = Union[bool, Atom]


class LatticeError(ValueError):
    """A fact or operation violates the inclusion preconditions."""


# rank in the chain  Gevrey < Cinf < Sobolev < D' < ultradistributions < B
_LEVEL = {"Cw": 0, "GR": 0, "GB": 0, "Cinf": 1, "H": 2, "D": 3, "UR": 4, "UB": 4, "B": 5}
_PARAM_TAGS = {"GR", "GB", "H", "UR", "UB"}


def _memo_hash(obj, key) -> int:
    h = obj.__dict__.get("_hash")
    if h is None:
        h = hash(key)
        object.__setattr__(obj, "_hash", h)
    return h


@dataclass(frozen=True, order=True)
class Param:
    var: Optional[str]
    offset: Fraction = Fraction(0)

    def __hash__(self):
        return _memo_hash(self, (self.var, self.offset))

    @classmethod
    def const(cls, value) -> "Param":
        return cls(None, Fraction(value))

    @property
    def is_const(self) -> bool:
        return self.var is None

    def value(self, env: Mapping[str, object] = None) -> Fraction:
        if self.var is None:
            return self.offset
        return Fraction(env[self.var]) + self.offset

    def shifted(self, c) -> "Param":
        return Param(self.var, self.offset + Fraction(c))

    def renamed(self, mapping: Mapping[str, str]) -> "Param":
        if self.var is None:
            return self
        return Param(mapping.get(self.var, self.var), self.offset)

    def text(self) -> str:
        if self.var is None:
            return str(self.offset)
        if self.offset == 0:
            return self.var
        sign = "+" if self.offset > 0 else "-"
        return f"{self.var}{sign}{abs(self.offset)}"


_PARAM_RE = re.compile(r"^\s*(?:([A-Za-z_][A-Za-z0-9_]*)\s*(?:([+-])\s*(\d+(?:/\d+)?))?|(-?\d+(?:/\d+)?))\s*$")


def parse_param(text: str) -> Param:
    m = _PARAM_RE.match(text)
    if m is None:
        raise ValueError(f"bad space parameter {text!r}")
    if m.group(4) is not None:
        return Param.const(Fraction(m.group(4)))
    off = Fraction(0)
    if m.group(3) is not None:
        off = Fraction(m.group(3)) * (-1 if m.group(2) == "-" else 1)
    return Param(m.group(1), off)


@dataclass(frozen=True, order=True)
class SheafSpace:
    """One node of the space lattice.

    Tags: ``Cw`` (real-analytic), ``GR``/``GB`` (Gevrey Roumieu/Beurling),
    ``Cinf``, ``H`` (local Sobolev; ``H{0}`` is L2), ``D`` (distributions),
    ``UR``/``UB`` (ultradistributions dual to ``GR``/``GB``), ``B``
    (hyperfunctions).
    """

    tag: str
    param: Optional[Param] = None

    def __hash__(self):
        return _memo_hash(self, (self.tag, self.param))

    def __post_init__(self):
        if self.tag not in _LEVEL:
            raise ValueError(f"unknown space tag {self.tag!r}")
        if (self.tag in _PARAM_TAGS) != (self.param is not None):
            raise ValueError(f"{self.tag} {'needs' if self.tag in _PARAM_TAGS else 'takes no'} parameter")
        if self.param is not None and self.param.is_const:
            v = self.param.offset
            if self.tag == "GR" and v < 1:
                raise LatticeError(f"Gevrey index must be >= 1, got {v}")
            if self.tag in ("GB", "UR", "UB") and v <= 1:
                raise LatticeError(f"index must be > 1 for {self.tag}, got {v}")
            if self.tag == "GR" and v == 1:
                object.__setattr__(self, "tag", "Cw")
                object.__setattr__(self, "param", None)

    # constructors
    @classmethod
    def gevrey(cls, s, beurling: bool = False) -> "SheafSpace":
        return cls("GB" if beurling else "GR", _as_param(s))

    @classmethod
    def ultra(cls, s, beurling: bool = False) -> "SheafSpace":
        return cls("UB" if beurling else "UR", _as_param(s))

    @classmethod
    def sobolev(cls, r) -> "SheafSpace":
        return cls("H", _as_param(r))

    @property
    def variables(self) -> Tuple[str, ...]:
        if self.param is None or self.param.var is None:
            return ()
        return (self.param.var,)

    @property
    def is_ground(self) -> bool:
        return not self.variables

    def domain_atoms(self) -> List[Atom]:
        """Constraints the parameter must satisfy for the descriptor to exist."""
        if self.param is None or self.param.var is None:
            return []
        v, o = self.param.var, self.param.offset
        if self.tag == "GR":
            return [Atom(None, v, o - 1)]           # v + o >= 1
        if self.tag in ("GB", "UR", "UB"):
            return [Atom(None, v, o - 1, strict=True)]
        return []

    def instantiate(self, env: Mapping[str, object]) -> "SheafSpace":
        if self.param is None or self.param.var is None:
            return self
        return SheafSpace(self.tag, Param.const(self.param.value(env)))

    def renamed(self, mapping: Mapping[str, str]) -> "SheafSpace":
        if self.param is None:
            return self
        return SheafSpace(self.tag, self.param.renamed(mapping))

    def shifted(self, c) -> "SheafSpace":
        return SheafSpace(self.tag, self.param.shifted(c))

    def text(self) -> str:
        t, p = self.tag, self.param
        if t == "Cw":
            return "Cw"
        if t == "Cinf":
            return "Cinf"
        if t == "D":
            return "D'"
        if t == "B":
            return "B"
        if t == "H":
            return "L2" if p == Param.const(0) else f"H{{{p.text()}}}"
        if t == "GR":
            return f"G{{{p.text()}}}"
        if t == "GB":
            return f"G({{{p.text()}}})"
        if t == "UR":
            return f"D'{{{p.text()}}}"
        return f"D'({{{p.text()}}})"

    def __str__(self):
        return self.text()


def _as_param(x) -> Param:
    if isinstance(x, Param):
        return x
    if isinstance(x, str):
        return parse_param(x)
    return Param.const(Fraction(x))


_SPACE_RE = re.compile(r"^(Cw|Cinf|L2|B|D'|G|H|D')(?:\{([^{}]*)\}|\(\{([^{}]*)\}\))?$")


def parse_space(text: str) -> SheafSpace:
    """Parse the canonical text form, e.g. ``G{3/2}``, ``D'({s})``, ``H{r+2}``."""
    t = text.strip().replace(" ", "")
    m = _SPACE_RE.match(t)
    if m is None:
        raise ValueError(f"unknown space descriptor {text!r}")
    head, roumieu, beurling = m.group(1), m.group(2), m.group(3)
    arg = roumieu if roumieu is not None else beurling
    if head in ("Cw", "Cinf", "L2", "B") or (head == "D'" and arg is None):
        if arg is not None:
            raise ValueError(f"{head} takes no parameter")
        return {"Cw": SheafSpace("Cw"), "Cinf": SheafSpace("Cinf"), "L2": SheafSpace.sobolev(0),
                "B": SheafSpace("B"), "D'": SheafSpace("D")}[head]
    if arg is None:
        raise ValueError(f"{head} needs a parameter")
    p = parse_param(arg)
    if head == "H":
        if beurling is not None:
            raise ValueError("Sobolev spaces have no Beurling form")
        return SheafSpace("H", p)
    if head == "G":
        return SheafSpace("GB" if beurling is not None else "GR", p)
    return SheafSpace("UB" if beurling is not None else "UR", p)


# inclusion order

def _gevrey_param(a: SheafSpace) -> Param:
    return Param.const(1) if a.tag == "Cw" else a.param


def _le(x: Param, y: Param, strict: bool) -> Relation:
    """x <= y (x < y when strict) as a bool or an atom."""
    c = y.offset - x.offset
    if x.var == y.var:
        return c > 0 or (c == 0 and not strict)
    return Atom(x.var, y.var, c, strict)


def relation(a: SheafSpace, b: SheafSpace) -> Relation:
    """Condition under which ``a`` is contained in ``b``."""
    la, lb = _LEVEL[a.tag], _LEVEL[b.tag]
    if la != lb:
        return la < lb
    if la == 0:
        ta = "GR" if a.tag == "Cw" else a.tag
        tb = "GR" if b.tag == "Cw" else b.tag
        x, y = _gevrey_param(a), _gevrey_param(b)
        return _le(x, y, strict=(ta == "GR" and tb == "GB"))
    if la == 2:
        return _le(b.param, a.param, strict=False)
    if la == 4:
        return _le(b.param, a.param, strict=(a.tag == "UB" and b.tag == "UR"))
    return True


def includes(a: SheafSpace, b: SheafSpace) -> bool:
    """``a`` is a subsheaf of ``b``.  Both descriptors must be ground."""
    if not (a.is_ground and b.is_ground):
        raise ValueError("includes() needs ground descriptors; use relation() for parameters")
    r = relation(a, b)
    assert isinstance(r, bool)
    return r


def relation_holds_on(zone: Zone, rel: Relation) -> bool:
    """The relation is true at every point of the zone."""
    if rel is True or zone.is_empty():
        return True
    if rel is False:
        return False
    return zone.add(rel.negate()).is_empty()


def constrain(zone: Zone, rel: Relation) -> Zone:
    if rel is True:
        return zone
    if rel is False:
        return Zone.empty(zone.vars)
    return zone.add(rel)


# facts

HOLDS, FAILS = "holds", "fails"


class _Core(tuple):
    """Tuple with a memoized hash; fact identities are hashed very often."""

    def __hash__(self):
        try:
            return self._h
        except AttributeError:
            self._h = tuple.__hash__(self)
            return self._h


@dataclass(frozen=True)
class HypoFact:
    """``P is h(F, G)``, ``P is h(F, G, H)``, a named property of P, or a negation.

    The zone quantifies universally over the parameters that appear in
    the spaces: the statement holds for every point of the zone.
    """

    op: str
    kind: str                       # "pair" | "triple" | "prop"
    polarity: str                   # "holds" | "fails"
    spaces: Tuple[SheafSpace, ...]
    zone: Zone
    name: str = ""                  # property name for kind "prop"
    args: Tuple[Fraction, ...] = ()
    provenance: object = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in ("pair", "triple", "prop"):
            raise ValueError(f"bad fact kind {self.kind!r}")
        if self.polarity not in (HOLDS, FAILS):
            raise ValueError(f"bad polarity {self.polarity!r}")
        if self.kind == "pair" and len(self.spaces) != 2:
            raise ValueError("pair facts take two spaces")
        if self.kind == "triple" and len(self.spaces) != 3:
            raise ValueError("triple facts take three spaces")
        if self.kind == "prop" and not self.name:
            raise ValueError("property facts need a name")

    @property
    def variables(self) -> Tuple[str, ...]:
        out: List[str] = []
        for s in self.spaces:
            out.extend(v for v in s.variables if v not in out)
        return tuple(out)

    def as_triple(self) -> Tuple[SheafSpace, SheafSpace, SheafSpace]:
        if self.kind == "pair":
            return (self.spaces[0], self.spaces[1], self.spaces[1])
        return tuple(self.spaces)

    def __hash__(self):
        return _memo_hash(self, self.core())

    def core(self):
        """Hashable identity without provenance."""
        c = self.__dict__.get("_core")
        if c is None:
            c = _Core((self.op, self.kind, self.polarity, self.name, self.args, self.spaces, self.zone))
            object.__setattr__(self, "_core", c)
        return c

    def statement(self) -> str:
        if self.kind == "prop":
            s = self.name
            if self.args:
                s += "[" + ", ".join(str(a) for a in self.args) + "]"
            if self.spaces:
                s += "(" + ", ".join(x.text() for x in self.spaces) + ")"
        else:
            s = "h(" + ", ".join(x.text() for x in self.spaces) + ")"
        return ("not " if self.polarity == FAILS else "") + s

    def text(self, with_op: bool = False) -> str:
        s = self.statement()
        if self.variables:
            s += " for " + self.zone.text()
        elif self.zone.is_empty():
            s += " for false"
        return f"{self.op}: {s}" if with_op else s

    def __str__(self):
        return self.text(with_op=True)


def validity_relations(kind: str, spaces: Sequence[SheafSpace]) -> List[Relation]:
    """Standing inclusions: G in F for pairs, H in G in F for triples."""
    if kind == "pair":
        return [relation(spaces[1], spaces[0])]
    if kind == "triple":
        return [relation(spaces[1], spaces[0]), relation(spaces[2], spaces[1])]
    return []


def domain_zone(spaces: Iterable[SheafSpace], base: Optional[Zone] = None) -> Zone:
    spaces = list(spaces)
    names = sorted({v for s in spaces for v in s.variables})
    z = Zone.universe(names) if base is None else base.extend(names)
    atoms = [a for s in spaces for a in s.domain_atoms()]
    return z.add_all(atoms) if atoms else z


def check_fact(f: HypoFact) -> None:
    """Raise LatticeError when a point of the zone breaks the standing inclusions."""
    z = domain_zone(f.spaces, f.zone)
    for rel in validity_relations(f.kind, f.spaces):
        if not relation_holds_on(z, rel):
            raise LatticeError(f"{f.statement()} violates the inclusion order on {f.zone.text()}")


def make_fact(op: str, kind: str, polarity: str, spaces: Sequence[SheafSpace],
              zone: Optional[Zone] = None, name: str = "", args=(), provenance=None,
              validate: bool = True) -> HypoFact:
    spaces = tuple(spaces)
    names = sorted({v for s in spaces for v in s.variables})
    z = Zone.universe(names) if zone is None else zone
    extra = set(z.vars) - set(names)
    if extra:
        raise ValueError(f"constraint mentions {sorted(extra)} which no space uses")
    z = domain_zone(spaces, z)
    f = HypoFact(op, kind, polarity, spaces, z, name, tuple(Fraction(a) for a in args), provenance)
    if validate:
        check_fact(f)
    return f


def _apart(f: HypoFact, prefix: str) -> Tuple[Tuple[SheafSpace, ...], Zone]:
    mapping = {v: prefix + v for v in f.variables}
    return tuple(s.renamed(mapping) for s in f.spaces), f.zone.rename(mapping)


def _equal(a: SheafSpace, b: SheafSpace) -> List[Relation]:
    return [relation(a, b), relation(b, a)]


def compose_hypo(f1: HypoFact, f2: HypoFact) -> HypoFact:
    """h(F, G) and h(G, H) give h(F, H)."""
    if f1.op != f2.op:
        raise ValueError("facts concern different operators")
    if f1.kind != "pair" or f2.kind != "pair":
        raise ValueError("composition takes pair facts")
    if f1.polarity != HOLDS or f2.polarity != HOLDS:
        raise ValueError("composition takes positive facts")
    s1, z1 = _apart(f1, "a.")
    s2, z2 = _apart(f2, "b.")
    z = z1.intersect(z2)
    for rel in _equal(s1[1], s2[0]):
        z = constrain(z, rel)
    if z.is_empty():
        raise LatticeError(f"middle spaces {f1.spaces[1]} and {f2.spaces[0]} do not match")
    spaces = (s1[0], s2[1])
    keep = sorted({v for s in spaces for v in s.variables})
    z = z.project(keep)
    back = {v: v.split(".", 1)[1] for v in keep}
    if len(set(back.values())) != len(back):
        back = {v: v.replace(".", "_") for v in keep}
    return make_fact(f1.op, "pair", HOLDS, [s.renamed(back) for s in spaces], z.rename(back),
                     provenance=("compose", f1, f2))


def restrict_hypo(f: HypoFact, G: SheafSpace) -> HypoFact:
    """h(F, H) and H in G in F give h(G, H).

    Parameters of ``G`` share the namespace of ``f``.
    """
    if f.kind != "pair" or f.polarity != HOLDS:
        raise ValueError("restriction takes a positive pair fact")
    F, H = f.spaces
    z = domain_zone([G], f.zone)
    for rel in (relation(H, G), relation(G, F)):
        if not relation_holds_on(z, rel):
            raise LatticeError(f"{G} does not lie between {H} and {F}")
    return make_fact(f.op, "pair", HOLDS, (G, H), z, provenance=("restrict", f))


def widen_negative(f: HypoFact, F: SheafSpace) -> HypoFact:
    """not h(G, H) and G in F give not h(F, H)."""
    if f.kind != "pair" or f.polarity != FAILS:
        raise ValueError("widening takes a negative pair fact")
    G, H = f.spaces
    z = domain_zone([F], f.zone)
    if not relation_holds_on(z, relation(G, F)):
        raise LatticeError(f"{G} is not contained in {F}")
    return make_fact(f.op, "pair", FAILS, (F, H), z, provenance=("widen", f))
