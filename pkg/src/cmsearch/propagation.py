"""Forward checking and generalized arc consistency over flat relations.

Domains are tuples of frozensets indexed by variable.  Both propagators
return the reduced domains, or ``None`` when some domain is wiped out.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .model import Model

Domains = tuple[frozenset[int], ...]


@dataclass(frozen=True)
class Relation:
    """A flat relation given either by its allowed or by its forbidden tuples."""

    scope: tuple[int, ...]
    allowed: frozenset[tuple[int, ...]] | None = None
    forbidden: frozenset[tuple[int, ...]] | None = None

    def allows(self, t: tuple[int, ...]) -> bool:
        if self.allowed is not None:
            return t in self.allowed
        return t not in self.forbidden

    def tuples_within(self, domains: Sequence[frozenset[int]]) -> Iterable[tuple[int, ...]]:
        doms = [domains[v] for v in self.scope]
        if self.allowed is not None:
            return (t for t in self.allowed if all(x in d for x, d in zip(t, doms)))
        return (t for t in itertools.product(*map(sorted, doms)) if t not in self.forbidden)


def factor_relation(model: Model, i: int) -> Relation | None:
    """Flat relation of factor ``i``, or None when it forbids nothing."""
    f = model.factors[i]
    if all(v != 0.0 for v in f.table):
        return None
    sizes = [model.domains[v].size for v in f.scope]
    allowed = frozenset(
        t for t, v in zip(itertools.product(*map(range, sizes)), f.table) if v != 0.0
    )
    return Relation(f.scope, allowed=allowed)


def factor_relations(model: Model) -> list[Relation]:
    rels = (factor_relation(model, i) for i in range(len(model.factors)))
    return [r for r in rels if r is not None]


def nogood(scope: Sequence[int], values: Sequence[int]) -> Relation:
    return Relation(tuple(scope), forbidden=frozenset([tuple(values)]))


def propagate_fc(
    relations: Iterable[Relation], domains: Sequence[frozenset[int]], a: Mapping[int, int]
) -> Domains | None:
    """Prune the single future variable of every relation that has one."""
    doms = list(domains)
    for r in relations:
        future = [i for i, v in enumerate(r.scope) if v not in a]
        if len(future) != 1:
            continue
        i = future[0]
        y = r.scope[i]
        t = [a.get(v, 0) for v in r.scope]
        keep = set()
        for val in doms[y]:
            t[i] = val
            if r.allows(tuple(t)):
                keep.add(val)
        if not keep:
            return None
        if len(keep) != len(doms[y]):
            doms[y] = frozenset(keep)
    return tuple(doms)


def propagate_ac(relations: Iterable[Relation], domains: Sequence[frozenset[int]]) -> Domains | None:
    """Generalized arc consistency, iterated to a fixpoint."""
    relations = list(relations)
    doms = list(domains)
    watching: dict[int, list[int]] = {}
    for ri, r in enumerate(relations):
        for v in r.scope:
            watching.setdefault(v, []).append(ri)
    queue = list(range(len(relations)))
    queued = set(queue)
    while queue:
        ri = queue.pop(0)
        queued.discard(ri)
        r = relations[ri]
        support: list[set[int]] = [set() for _ in r.scope]
        found = False
        for t in r.tuples_within(doms):
            found = True
            for s, x in zip(support, t):
                s.add(x)
        if not found:
            return None
        for v, s in zip(r.scope, support):
            if len(s) < len(doms[v]):
                doms[v] = frozenset(s)
                for rj in watching[v]:
                    if rj != ri and rj not in queued:
                        queue.append(rj)
                        queued.add(rj)
    return tuple(doms)


def full_domains(model: Model) -> Domains:
    return tuple(frozenset(range(d.size)) for d in model.domains)
