"""Exact parameter regions: intervals and difference-bound zones.

A ``Zone`` is a conjunction of constraints ``x - y <= c`` or ``x - y < c``
with rational ``c`` over named variables (``y`` may be the constant zero).
This is all the lattice ever produces, so projections, intersections and
inclusion tests stay exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

# A bound is (c, k): k = 0 means "< c", k = 1 means "<= c".  Tuple order is
# tightness order.  None stands for no bound.
Bound = Optional[Tuple[Fraction, int]]
LE, LT = 1, 0


def _badd(a: Bound, b: Bound) -> Bound:
    if a is None or b is None:
        return None
    return (a[0] + b[0], min(a[1], b[1]))


def _bmin(a: Bound, b: Bound) -> Bound:
    if a is None:
        return b
    if b is None:
        return a
    return a if a <= b else b


def _ble(a: Bound, b: Bound) -> bool:
    """a is at least as tight as b."""
    if b is None:
        return True
    if a is None:
        return False
    return a <= b


@dataclass(frozen=True)
class Atom:
    """x - y <= c (strict: <).  Either name may be None for the constant 0."""

    x: Optional[str]
    y: Optional[str]
    c: Fraction
    strict: bool = False

    def negate(self) -> "Atom":
        # not (x - y <= c)  <=>  y - x < -c
        return Atom(self.y, self.x, -self.c, not self.strict)


class Zone:
    __slots__ = ("vars", "m", "_empty", "_hash")

    def __init__(self, variables: Sequence[str], matrix=None, closed: bool = False):
        self.vars = tuple(variables)
        n = len(self.vars) + 1
        if matrix is None:
            matrix = tuple(tuple(((Fraction(0), LE) if i == j else None) for j in range(n)) for i in range(n))
        self.m = matrix
        self._hash = None
        if not closed:
            self._close()
        else:
            self._empty = any(self.m[i][i] is not None and self.m[i][i] < (0, LE) for i in range(n))

    # construction
    @classmethod
    def universe(cls, variables: Sequence[str] = ()) -> "Zone":
        return _universe(tuple(sorted(variables)))

    @classmethod
    def empty(cls, variables: Sequence[str] = ()) -> "Zone":
        z = cls.universe(variables)
        return z.add(Atom(None, None, Fraction(-1)))

    @classmethod
    def from_atoms(cls, atoms: Iterable[Atom], variables: Sequence[str] = ()) -> "Zone":
        atoms = list(atoms)
        names = set(variables)
        for a in atoms:
            names.update(v for v in (a.x, a.y) if v is not None)
        return cls.universe(sorted(names)).add_all(atoms)

    @classmethod
    def parse(cls, text: str, variables: Sequence[str] = ()) -> "Zone":
        return cls.from_atoms(parse_constraints(text), variables)

    def _idx(self, v: Optional[str]) -> int:
        return 0 if v is None else self.vars.index(v) + 1

    def _close(self):
        n = len(self.vars) + 1
        m = [list(r) for r in self.m]
        for k in range(n):
            mk = m[k]
            for i in range(n):
                mik = m[i][k]
                if mik is None:
                    continue
                mi = m[i]
                for j in range(n):
                    cand = _badd(mik, mk[j])
                    if cand is not None and (mi[j] is None or cand < mi[j]):
                        mi[j] = cand
        empty = any(m[i][i] is not None and m[i][i] < (0, LE) for i in range(n))
        if empty:
            m = [[(Fraction(-1), LE) if i == j else None for j in range(n)] for i in range(n)]
        self.m = tuple(tuple(r) for r in m)
        self._empty = empty

    def is_empty(self) -> bool:
        return self._empty

    def add(self, atom: Atom) -> "Zone":
        z = self
        for v in (atom.x, atom.y):
            if v is not None and v not in z.vars:
                z = z.extend([v])
        i, j = z._idx(atom.x), z._idx(atom.y)
        b = (Fraction(atom.c), LT if atom.strict else LE)
        if z.m[i][j] is not None and z.m[i][j] <= b:
            return z
        rows = [list(r) for r in z.m]
        rows[i][j] = b if rows[i][j] is None else min(rows[i][j], b)
        return Zone(z.vars, tuple(tuple(r) for r in rows))

    def add_all(self, atoms: Iterable[Atom]) -> "Zone":
        z = self
        atoms = list(atoms)
        names = [v for a in atoms for v in (a.x, a.y) if v is not None and v not in z.vars]
        if names:
            z = z.extend(names)
        rows = [list(r) for r in z.m]
        for a in atoms:
            i, j = z._idx(a.x), z._idx(a.y)
            b = (Fraction(a.c), LT if a.strict else LE)
            rows[i][j] = b if rows[i][j] is None else min(rows[i][j], b)
        return Zone(z.vars, tuple(tuple(r) for r in rows))

    def extend(self, names: Iterable[str]) -> "Zone":
        new = tuple(sorted(set(self.vars) | set(names)))
        if new == self.vars:
            return self
        return _reindex(self, new)

    def project(self, keep: Iterable[str]) -> "Zone":
        keep = tuple(sorted(set(keep) & set(self.vars)))
        if keep == self.vars:
            return self
        return _project(self, keep)

    def rename(self, mapping: Mapping[str, str]) -> "Zone":
        names = [mapping.get(v, v) for v in self.vars]
        if len(set(names)) != len(names):
            raise ValueError("renaming merges variables")
        order = sorted(range(len(names)), key=lambda k: names[k])
        perm = [0] + [k + 1 for k in order]
        mat = tuple(tuple(self.m[perm[i]][perm[j]] for j in range(len(perm))) for i in range(len(perm)))
        z = Zone.__new__(Zone)
        z.vars = tuple(names[k] for k in order)
        z.m = mat
        z._empty = self._empty
        z._hash = None
        return z

    def intersect(self, other: "Zone") -> "Zone":
        return _intersect(self, other)

    def includes(self, other: "Zone") -> bool:
        """self contains other."""
        return _includes(self, other)

    def contains_point(self, values: Mapping[str, object]) -> bool:
        if self._empty:
            return False
        val = [Fraction(0)] + [Fraction(values[v]) for v in self.vars]
        n = len(val)
        for i in range(n):
            for j in range(n):
                b = self.m[i][j]
                if b is None or i == j:
                    continue
                d = val[i] - val[j]
                if d > b[0] or (d == b[0] and b[1] == LT):
                    return False
        return True

    def substitute(self, values: Mapping[str, object]) -> "Zone":
        """Fix some variables to constants and eliminate them."""
        atoms = []
        for v, c in values.items():
            if v in self.vars:
                atoms += [Atom(v, None, Fraction(c)), Atom(None, v, -Fraction(c))]
        return self.add_all(atoms).project([v for v in self.vars if v not in values])

    def bounds(self, v: str) -> Tuple[Bound, Bound]:
        """(upper, lower) for a single variable: v <= up and -v <= low."""
        i = self._idx(v)
        return self.m[i][0], self.m[0][i]

    def atoms(self) -> List[Atom]:
        """A non-redundant-ish constraint list reproducing the zone."""
        out = []
        n = len(self.vars) + 1
        names = (None,) + self.vars
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                b = self.m[i][j]
                if b is None:
                    continue
                # drop entries implied by a path through a third index
                implied = False
                for k in range(n):
                    if k in (i, j):
                        continue
                    p = _badd(self.m[i][k], self.m[k][j])
                    if p is not None and p <= b and self.m[i][k] != b and self.m[k][j] != b:
                        implied = True
                        break
                if not implied:
                    out.append(Atom(names[i], names[j], b[0], b[1] == LT))
        return out

    def text(self) -> str:
        if self._empty:
            return "false"
        parts = []
        for v in self.vars:
            up, lo = self.bounds(v)
            lo_s = None if lo is None else (f"{-lo[0]} {'<' if lo[1] == LT else '<='} ")
            up_s = None if up is None else (f" {'<' if up[1] == LT else '<='} {up[0]}")
            if lo is not None and up is not None and lo == (-up[0], LE) and up[1] == LE:
                parts.append(f"{v} = {up[0]}")
            elif lo is not None and up is None:
                parts.append(f"{v} {'>' if lo[1] == LT else '>='} {-lo[0]}")
            elif lo_s or up_s:
                parts.append(f"{lo_s or ''}{v}{up_s or ''}")
        names = self.vars
        for a in range(len(names)):
            for b in range(len(names)):
                if a == b:
                    continue
                bd = self.m[a + 1][b + 1]
                if bd is None:
                    continue
                # skip differences implied by the unary bounds
                up_a = self.m[a + 1][0]
                lo_b = self.m[0][b + 1]
                via = _badd(up_a, lo_b)
                if via is not None and via <= bd:
                    continue
                op = "<" if bd[1] == LT else "<="
                c = bd[0]
                if c == 0:
                    parts.append(f"{names[a]} {op} {names[b]}")
                elif c > 0:
                    parts.append(f"{names[a]} - {names[b]} {op} {c}")
                else:
                    parts.append(f"{names[b]} - {names[a]} {'>' if op == '<' else '>='} {-c}")
        return ", ".join(parts) if parts else "true"

    def key(self):
        return (self.vars, self.m)

    def __eq__(self, other):
        if not isinstance(other, Zone):
            return NotImplemented
        if self._empty and other._empty:
            return True
        return self.vars == other.vars and self.m == other.m

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("empty",) if self._empty else (self.vars, self.m))
        return self._hash

    def __repr__(self):
        return f"Zone({self.text()!r})"


@lru_cache(maxsize=None)
def _universe(variables: Tuple[str, ...]) -> Zone:
    return Zone(variables)


@lru_cache(maxsize=200_000)
def _reindex(z: Zone, new: Tuple[str, ...]) -> Zone:
    n = len(new) + 1
    pos = [0] + [new.index(v) + 1 for v in z.vars]
    rows = [[((Fraction(0), LE) if i == j else None) for j in range(n)] for i in range(n)]
    for a, pa in enumerate(pos):
        for b, pb in enumerate(pos):
            rows[pa][pb] = z.m[a][b]
    out = Zone.__new__(Zone)
    out.vars = new
    out.m = tuple(tuple(r) for r in rows)
    out._empty = z._empty
    out._hash = None
    return out


@lru_cache(maxsize=200_000)
def _project(z: Zone, keep: Tuple[str, ...]) -> Zone:
    if z._empty:
        return Zone.empty(keep)
    idx = [0] + [z.vars.index(v) + 1 for v in keep]
    out = Zone.__new__(Zone)
    out.vars = keep
    out.m = tuple(tuple(z.m[i][j] for j in idx) for i in idx)
    out._empty = False
    out._hash = None
    return out


@lru_cache(maxsize=200_000)
def _intersect(a: Zone, b: Zone) -> Zone:
    names = tuple(sorted(set(a.vars) | set(b.vars)))
    a2, b2 = a.extend(names), b.extend(names)
    n = len(names) + 1
    rows = tuple(tuple(_bmin(a2.m[i][j], b2.m[i][j]) for j in range(n)) for i in range(n))
    return Zone(names, rows)


@lru_cache(maxsize=200_000)
def _includes(a: Zone, b: Zone) -> bool:
    if b._empty:
        return True
    if a._empty:
        return False
    names = tuple(sorted(set(a.vars) | set(b.vars)))
    a2, b2 = a.extend(names), b.extend(names)
    n = len(names) + 1
    return all(_ble(b2.m[i][j], a2.m[i][j]) for i in range(n) for j in range(n))


# constraint text

_CMP = re.compile(r"(<=|>=|==|=|<|>)")
_TERM = re.compile(r"\s*([+-]?)\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z0-9_]*))")


def _linear(text: str) -> Tuple[Dict[str, int], Fraction]:
    coeffs: Dict[str, int] = {}
    const = Fraction(0)
    pos = 0
    text = text.strip()
    if not text:
        raise ValueError("empty side in constraint")
    first = True
    while pos < len(text):
        m = _TERM.match(text, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse constraint term near {text[pos:]!r}")
        sign = -1 if m.group(1) == "-" else 1
        if not first and not m.group(1):
            raise ValueError(f"missing operator in {text!r}")
        if m.group(2):
            const += sign * Fraction(m.group(2))
        else:
            coeffs[m.group(3)] = coeffs.get(m.group(3), 0) + sign
        pos = m.end()
        first = False
    return {v: c for v, c in coeffs.items() if c}, const


def _atom_from(lhs, rhs, op: str) -> List[Atom]:
    (lc, lk), (rc, rk) = lhs, rhs
    coeffs = dict(lc)
    for v, c in rc.items():
        coeffs[v] = coeffs.get(v, 0) - c
    coeffs = {v: c for v, c in coeffs.items() if c}
    const = rk - lk  # sum(coeffs * v) op const
    if op in (">", ">="):
        coeffs = {v: -c for v, c in coeffs.items()}
        const = -const
        op = "<" if op == ">" else "<="
    pos = [v for v, c in coeffs.items() if c == 1]
    neg = [v for v, c in coeffs.items() if c == -1]
    if len(pos) > 1 or len(neg) > 1 or any(abs(c) > 1 for c in coeffs.values()):
        raise ValueError("only difference constraints x - y op c are supported")
    x = pos[0] if pos else None
    y = neg[0] if neg else None
    if op in ("=", "=="):
        return [Atom(x, y, const), Atom(y, x, -const)]
    return [Atom(x, y, const, strict=(op == "<"))]


@lru_cache(maxsize=4096)
def _parse_constraints_cached(text: str) -> Tuple[Atom, ...]:
    atoms: List[Atom] = []
    for clause in re.split(r"[,;]|\band\b", text):
        clause = clause.strip()
        if not clause or clause == "true":
            continue
        pieces = _CMP.split(clause)
        if len(pieces) < 3:
            raise ValueError(f"no comparison in {clause!r}")
        sides = [_linear(p) for p in pieces[0::2]]
        ops = pieces[1::2]
        for k, op in enumerate(ops):
            atoms.extend(_atom_from(sides[k], sides[k + 1], op))
    return tuple(atoms)


def parse_constraints(text: str) -> List[Atom]:
    """Parse e.g. ``"1 < s <= 3/2"``, ``"r > s > 1"``, ``"t - r >= 2, s = 2"``."""
    return list(_parse_constraints_cached(text))


# single-variable interval sets

@dataclass(frozen=True)
class Interval:
    lo: Optional[Fraction]
    lo_closed: bool
    hi: Optional[Fraction]
    hi_closed: bool

    def is_empty(self) -> bool:
        if self.lo is None or self.hi is None:
            return False
        return self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed))

    def contains(self, x) -> bool:
        x = Fraction(x)
        if self.lo is not None and (x < self.lo or (x == self.lo and not self.lo_closed)):
            return False
        if self.hi is not None and (x > self.hi or (x == self.hi and not self.hi_closed)):
            return False
        return True

    def __str__(self):
        lo = "-inf" if self.lo is None else str(self.lo)
        hi = "inf" if self.hi is None else str(self.hi)
        return f"{'[' if self.lo_closed and self.lo is not None else '('}{lo}, {hi}{']' if self.hi_closed and self.hi is not None else ')'}"


def _lo_key(iv: Interval):
    return (-float("inf"),) if iv.lo is None else (iv.lo, 0 if iv.lo_closed else 1)


class IntervalSet:
    """Finite union of disjoint, sorted intervals."""

    def __init__(self, intervals: Iterable[Interval] = ()):
        ivs = sorted((iv for iv in intervals if not iv.is_empty()), key=_lo_key)
        merged: List[Interval] = []
        for iv in ivs:
            if merged and _touch(merged[-1], iv):
                merged[-1] = _join(merged[-1], iv)
            else:
                merged.append(iv)
        self.intervals = tuple(merged)

    @classmethod
    def from_zone(cls, z: Zone, var: str) -> "IntervalSet":
        if z.is_empty():
            return cls()
        z = z.project([var])
        if var not in z.vars:
            return cls([Interval(None, False, None, False)])
        up, lo = z.bounds(var)
        hi = None if up is None else up[0]
        hic = up is not None and up[1] == LE
        lov = None if lo is None else -lo[0]
        loc = lo is not None and lo[1] == LE
        return cls([Interval(lov, loc, hi, hic)])

    @classmethod
    def parse(cls, text: str, var: str) -> "IntervalSet":
        return cls.from_zone(Zone.parse(text, [var]), var)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a in self.intervals:
            for b in other.intervals:
                lo, loc = _max_lo(a, b)
                hi, hic = _min_hi(a, b)
                out.append(Interval(lo, loc, hi, hic))
        return IntervalSet(out)

    def contains(self, x) -> bool:
        return any(iv.contains(x) for iv in self.intervals)

    def is_empty(self) -> bool:
        return not self.intervals

    def __eq__(self, other):
        if isinstance(other, str):
            return str(self) == other
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __str__(self):
        if not self.intervals:
            return "{}"
        return " U ".join(str(iv) for iv in self.intervals)

    def __repr__(self):
        return f"IntervalSet({self})"


def _touch(a: Interval, b: Interval) -> bool:
    # b starts no later than a ends (with closedness making them adjacent)
    if a.hi is None or b.lo is None:
        return True
    if b.lo < a.hi:
        return True
    if b.lo == a.hi:
        return a.hi_closed or b.lo_closed
    return False


def _join(a: Interval, b: Interval) -> Interval:
    if a.hi is None or (b.hi is not None and (b.hi < a.hi or (b.hi == a.hi and a.hi_closed))):
        return Interval(a.lo, a.lo_closed, a.hi, a.hi_closed)
    return Interval(a.lo, a.lo_closed, b.hi, b.hi_closed)


def _max_lo(a: Interval, b: Interval):
    if a.lo is None:
        return b.lo, b.lo_closed
    if b.lo is None:
        return a.lo, a.lo_closed
    if a.lo > b.lo:
        return a.lo, a.lo_closed
    if b.lo > a.lo:
        return b.lo, b.lo_closed
    return a.lo, a.lo_closed and b.lo_closed


def _min_hi(a: Interval, b: Interval):
    if a.hi is None:
        return b.hi, b.hi_closed
    if b.hi is None:
        return a.hi, a.hi_closed
    if a.hi < b.hi:
        return a.hi, a.hi_closed
    if b.hi < a.hi:
        return b.hi, b.hi_closed
    return a.hi, a.hi_closed and b.hi_closed
