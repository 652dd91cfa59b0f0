"""Depth-first and breadth-first AND/OR search over the context-minimal graph."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Mapping

from .model import Model, Task
from .propagation import (
    Domains,
    Relation,
    factor_relations,
    full_domains,
    nogood,
    propagate_ac,
    propagate_fc,
)
from .report import Backbone, NodeKey, RunReport, TupleKey
from .structure import PseudoTree

CACHING = ("full", "none")
LOOKAHEADS = ("none", "fc", "ac")


@dataclass(frozen=True)
class AoOptions:
    caching: str = "full"
    lookahead: str = "none"
    nogood: bool = False
    gbj: bool = False
    lookahead_uses_nogoods: bool = False

    def __post_init__(self):
        if self.caching not in CACHING:
            raise ValueError(f"unknown caching mode {self.caching!r}")
        if self.lookahead not in LOOKAHEADS:
            raise ValueError(f"unknown lookahead {self.lookahead!r}")
        if self.lookahead_uses_nogoods and (self.lookahead == "none" or self.caching != "full"):
            raise ValueError("look-ahead no-goods need a look-ahead scheme and full caching")


def arc_label(model: Model, t: PseudoTree, x: int, a: Mapping[int, int], task: Task = Task.SUM_PRODUCT) -> float:
    """Combined value of the factors whose deepest variable is ``x``."""
    bb = Backbone(model, t, task)
    vals = [a.get(v, 0) for v in range(model.n)]
    return bb.label(x, vals)


class _Search:
    def __init__(self, bb: Backbone, opts: AoOptions):
        self.bb = bb
        self.opts = opts
        n = bb.model.n
        self.n = n
        self.vals = [-1] * n
        self.full = opts.caching == "full"
        self.cache: list[dict[tuple[int, ...], float]] = [{} for _ in range(n)]
        self.hits = [0] * n
        self.entries = [0] * n
        self.and_nodes = [0] * n
        self.expanded: set[tuple[int, tuple[int, ...]]] = set()
        self.visits = 0
        self.evaluated = 0
        self.explored: set[TupleKey] = set()
        self.nodes: set[NodeKey] = set()
        self.trace: list[tuple[TupleKey, float]] = []
        self.relations: list[Relation] = factor_relations(bb.model) if opts.lookahead != "none" else []
        self.nogoods: list[Relation] = []
        self.sep_set = [frozenset(s) for s in bb.sep]

    # keys: separator assignment when caching, full path otherwise
    def or_key(self, x: int, vals) -> tuple[int, ...]:
        scope = self.bb.sep[x] if self.full else self.bb.tree.ancestors[x]
        return tuple(vals[v] for v in scope)

    def initial_domains(self) -> Domains | None:
        doms = full_domains(self.bb.model)
        if self.opts.lookahead == "none":
            return doms
        return self.propagate(doms, {})

    def propagate(self, doms, a: Mapping[int, int]) -> Domains | None:
        rels = self.relations + self.nogoods if self.opts.lookahead_uses_nogoods else self.relations
        if self.opts.lookahead == "fc":
            return propagate_fc(rels, doms, a)
        return propagate_ac(rels, doms)

    def assign(self, doms, x: int, v: int, a: Mapping[int, int]) -> Domains | None:
        if self.opts.lookahead == "none":
            return doms
        doms = doms[:x] + (frozenset([v]),) + doms[x + 1 :]
        return self.propagate(doms, a)

    def record(self, x: int, sep_key: tuple[int, ...], v: int, label: float) -> None:
        key = TupleKey(x, sep_key + (v,))
        self.explored.add(key)
        self.nodes.add(self.bb.node_key(key))
        self.and_nodes[x] += 1
        self.trace.append((key, label))

    def report(self, value: float) -> RunReport:
        return RunReport(
            value=value,
            explored_tuples=frozenset(self.explored),
            explored_nodes=frozenset(self.nodes),
            tuples_evaluated=self.evaluated,
            cache_hits=sum(self.hits),
            cache_entries=sum(self.entries),
            or_expansions=len(self.expanded),
            or_visits=self.visits,
            arcs=sum(self.and_nodes),
            and_nodes_by_var=tuple(self.and_nodes),
            cache_hits_by_var=tuple(self.hits),
            cache_entries_by_var=tuple(self.entries),
            trace=tuple(self.trace),
            fingerprint=self.bb.fingerprint,
        )


class _DepthFirst(_Search):
    def run(self) -> RunReport:
        doms = self.initial_domains()
        if doms is None:
            return self.report(0.0)
        value, _ = self.or_node(self.bb.tree.root, doms)
        return self.report(value)

    def or_node(self, x: int, doms: Domains) -> tuple[float, frozenset[int] | None]:
        """Value of OR node ``x`` under the current path.

        The second item is, for zero values, the set of ancestors whose
        current assignment already forces the zero.
        """
        bb, vals = self.bb, self.vals
        self.visits += 1
        sep = bb.sep[x]
        sep_key = tuple(vals[v] for v in sep)
        key = self.or_key(x, vals)
        store = self.full and x not in bb.dead
        if store and key in self.cache[x]:
            self.hits[x] += 1
            v = self.cache[x][key]
            return v, (self.sep_set[x] if v == 0.0 else None)
        self.expanded.add((x, key))

        gbj = self.opts.gbj
        culprits = set(bb.graph_anc[x])
        total = 0.0
        jumped = None
        for v in sorted(doms[x]):
            vals[x] = v
            self.evaluated += 1
            label = bb.label(x, vals)
            if label == 0.0:
                continue
            self.record(x, sep_key, v, label)
            child_doms = doms
            if self.opts.lookahead != "none":
                path = {u: vals[u] for u in bb.tree.ancestors[x]}
                path[x] = v
                child_doms = self.assign(doms, x, v, path)
                if child_doms is None:
                    culprits |= self.sep_set[x]
                    continue
            prod = label
            for w in bb.tree.children[x]:
                cv, reason = self.or_node(w, child_doms)
                if gbj and reason is not None:
                    if x not in reason:
                        jumped = reason
                        break
                    culprits |= reason
                prod *= cv
            if jumped is not None:
                break
            total = bb.marginalize(total, prod)
        vals[x] = -1

        if jumped is not None:
            total = 0.0
        if store:
            self.cache[x][key] = total
            self.entries[x] += 1
        if total == 0.0 and self.opts.lookahead_uses_nogoods:
            self.nogoods.append(nogood(sep, sep_key))
        if jumped is not None:
            return 0.0, jumped
        if total == 0.0:
            culprits.discard(x)
            return 0.0, frozenset(culprits)
        return total, None


@dataclass
class _OrRecord:
    doms: Domains
    vals: list[int]
    ands: list[tuple[float, list[tuple[int, tuple[int, ...]]] | None]]


class _BreadthFirst(_Search):
    def run(self) -> RunReport:
        bb = self.bb
        tree = bb.tree
        doms = self.initial_domains()
        if doms is None:
            return self.report(0.0)
        layers = sorted(range(self.n), key=lambda v: (tree.depth[v], v))
        graph: list[dict[tuple[int, ...], _OrRecord]] = [{} for _ in range(self.n)]
        root = tree.root
        graph[root][()] = _OrRecord(doms, [-1] * self.n, [])
        self.visits += 1

        for x in layers:
            sep = bb.sep[x]
            for key, rec in graph[x].items():
                self.expanded.add((x, key))
                if self.full and x not in bb.dead:
                    self.entries[x] += 1
                vals = rec.vals
                sep_key = tuple(vals[v] for v in sep)
                for v in sorted(rec.doms[x]):
                    vals[x] = v
                    self.evaluated += 1
                    label = bb.label(x, vals)
                    if label == 0.0:
                        continue
                    self.record(x, sep_key, v, label)
                    child_doms = rec.doms
                    if self.opts.lookahead != "none":
                        path = {u: vals[u] for u in tree.ancestors[x]}
                        path[x] = v
                        child_doms = self.assign(rec.doms, x, v, path)
                        if child_doms is None:
                            rec.ands.append((label, None))
                            continue
                    links = []
                    for w in tree.children[x]:
                        wkey = self.or_key(w, vals)
                        self.visits += 1
                        if wkey in graph[w]:
                            self.hits[w] += 1
                        else:
                            graph[w][wkey] = _OrRecord(child_doms, list(vals), [])
                        links.append((w, wkey))
                    rec.ands.append((label, links))
                vals[x] = -1

        values: list[dict[tuple[int, ...], float]] = [{} for _ in range(self.n)]
        for x in reversed(layers):
            for key, rec in graph[x].items():
                total = 0.0
                for label, links in rec.ands:
                    if links is None:
                        continue
                    prod = label
                    for w, wkey in links:
                        prod *= values[w][wkey]
                    total = bb.marginalize(total, prod)
                values[x][key] = total
        return self.report(values[root][()])


def _backbone(model: Model, t: PseudoTree, task: Task) -> Backbone:
    return Backbone(model, t, task)


def ao_df(model: Model | Backbone, t: PseudoTree | None = None, task: Task = Task.SUM_PRODUCT,
          opts: AoOptions = AoOptions()) -> RunReport:
    bb = model if isinstance(model, Backbone) else _backbone(model, t, task)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * bb.model.n + 1000))
    try:
        return _DepthFirst(bb, opts).run()
    finally:
        sys.setrecursionlimit(limit)


def ao_bf(model: Model | Backbone, t: PseudoTree | None = None, task: Task = Task.SUM_PRODUCT,
          opts: AoOptions = AoOptions()) -> RunReport:
    if opts.gbj:
        raise ValueError("graph-based backjumping needs a depth-first traversal")
    bb = model if isinstance(model, Backbone) else _backbone(model, t, task)
    return _BreadthFirst(bb, opts).run()
