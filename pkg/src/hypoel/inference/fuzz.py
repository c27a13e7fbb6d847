"""Randomized soundness checks for the derivation engine.

Axiom sets are drawn from facts known to be jointly consistent: the
seeds and guards of catalog operators together with facts of the full
catalog closure.  Each set is derived twice under different rule and
axiom orders; the two closures must imply the same instances, every fact
must respect the inclusion order, and no holds/fails conflict may appear.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from ..sheaf_lattice import LatticeError, check_fact
from .catalog import CatalogEntry, catalog, catalog_closure
from .engine import derive


@dataclass
class FuzzReport:
    cases: int
    seed: int
    nondeterministic: List[int] = field(default_factory=list)
    ill_formed: List[int] = field(default_factory=list)
    contradictory: List[int] = field(default_factory=list)
    facts_total: int = 0
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not (self.nondeterministic or self.ill_formed or self.contradictory)

    def to_dict(self) -> dict:
        return {"cases": self.cases, "seed": self.seed, "ok": self.ok,
                "nondeterministic": self.nondeterministic[:20], "ill_formed": self.ill_formed[:20],
                "contradictory": self.contradictory[:20], "facts_total": self.facts_total}


def fuzz(cases: int = 10_000, seed: int = 0, entries: Optional[Sequence[CatalogEntry]] = None,
         derived_share: float = 0.3) -> FuzzReport:
    entries = list(entries) if entries is not None else catalog()
    full = catalog_closure()
    pool = {}
    for e in entries:
        base = e.axioms()
        extra = [(f, "closure") for f in full.facts_for(e.id)]
        if base or extra:
            pool[e.id] = (base, extra)
    trs = {e.id: e.transpose_id for e in entries if e.transpose_id}
    ids = sorted(pool)
    rng = random.Random(seed)
    rep = FuzzReport(cases, seed)
    t0 = time.perf_counter()
    for k in range(cases):
        ops = rng.sample(ids, 1 if rng.random() < 0.7 else 2)
        ax = []
        for o in ops:
            base, extra = pool[o]
            ax += rng.sample(base, rng.randint(0, len(base)))
            if extra and rng.random() < derived_share:
                ax += rng.sample(extra, rng.randint(1, min(3, len(extra))))
        tr = {o: trs[o] for o in ops if o in trs}
        c1 = derive(ax, tr, operators=ops, rule_order_seed=rng.randrange(1 << 30))
        c2 = derive(ax, tr, operators=ops, rule_order_seed=rng.randrange(1 << 30))
        rep.facts_total += len(c1.facts)
        if not c1.same_content(c2):
            rep.nondeterministic.append(k)
        try:
            for f in c1.facts:
                check_fact(f)
        except LatticeError:
            rep.ill_formed.append(k)
        if c1.contradictions or c2.contradictions:
            rep.contradictory.append(k)
    rep.seconds = time.perf_counter() - t0
    return rep
