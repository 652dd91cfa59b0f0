"""Run reports and the per-run view of a model over a pseudo tree."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .model import Model, Task, functional_factors, primal_graph, render_model, with_evidence
from .structure import (
    ContextTable,
    PseudoTree,
    build_bucket_tree,
    contexts,
    dead_cache_vars,
    graph_ancestors,
    pseudo_tree_of,
    validate_pseudo_tree,
)


class TupleKey(NamedTuple):
    """One assignment to a bucket scope: separator values, then the variable."""

    var: int
    values: tuple[int, ...]


class NodeKey(NamedTuple):
    """A context-merged AND node: values over the AND context."""

    var: int
    values: tuple[int, ...]


@dataclass(frozen=True)
class Message:
    source: int
    scope: tuple[int, ...]
    table: tuple[float, ...]


@dataclass(frozen=True)
class RunReport:
    value: float
    explored_tuples: frozenset[TupleKey]
    explored_nodes: frozenset[NodeKey]
    tuples_evaluated: int
    messages_stored: int = 0
    peak_live_entries: int = 0
    cache_hits: int = 0
    cache_entries: int = 0
    or_expansions: int = 0
    or_visits: int = 0
    arcs: int = 0
    and_nodes_by_var: tuple[int, ...] = ()
    cache_hits_by_var: tuple[int, ...] = ()
    cache_entries_by_var: tuple[int, ...] = ()
    messages: tuple[Message, ...] = ()
    trace: tuple[tuple[TupleKey, float], ...] = field(default=(), repr=False)
    fingerprint: str = ""

    def tuples_by_var(self, n: int) -> list[int]:
        counts = [0] * n
        for t in self.explored_tuples:
            counts[t.var] += 1
        return counts

    def nodes_by_var(self, n: int) -> list[set[tuple[int, ...]]]:
        out: list[set[tuple[int, ...]]] = [set() for _ in range(n)]
        for k in self.explored_nodes:
            out[k.var].add(k.values)
        return out


def fingerprint(model: Model, tree: PseudoTree) -> str:
    h = hashlib.sha256(render_model(model).encode())
    h.update(repr(tree.parent).encode())
    return h.hexdigest()[:16]


class Backbone:
    """A model bound to a pseudo tree, with everything a run needs precomputed.

    Factor tables are routed through their flat constraint for COUNT and
    CONSISTENCY; evidence recorded in the model is folded in first.
    """

    def __init__(self, model: Model, tree: PseudoTree, task: Task, order: Sequence[int] | None = None):
        g = primal_graph(model)
        if not validate_pseudo_tree(tree, g):
            raise ValueError("not a pseudo tree of the model's primal graph")
        self.source = model
        self.model = functional_factors(with_evidence(model), task)
        self.task = task
        self.tree = tree
        self.graph = g
        self.ctx: ContextTable = contexts(tree, g)
        self.order = tuple(order) if order is not None else tree.preorder
        self.dead = frozenset(dead_cache_vars(tree, self.ctx))
        self.graph_anc = tuple(graph_ancestors(tree, g, x) for x in range(model.n))
        self.fingerprint = fingerprint(model, tree)
        n = model.n
        m = self.model
        depth = tree.depth
        placed: list[list[int]] = [[] for _ in range(n)]
        for i, f in enumerate(m.factors):
            home = max(f.scope, key=depth.__getitem__) if f.scope else tree.root
            placed[home].append(i)
        # (scope, strides, table) per factor in the bucket of each variable
        self.bucket = tuple(
            tuple((m.factors[i].scope, m._strides[i], m.factors[i].table) for i in placed[x])
            for x in range(n)
        )
        self.placed = tuple(tuple(p) for p in placed)
        self.sep = self.ctx.sep
        self.andctx = self.ctx.andctx
        # positions of AND-context variables inside a bucket tuple (sep + var)
        self.and_pos = tuple(
            tuple((self.sep[x] + (x,)).index(v) for v in self.andctx[x]) for x in range(n)
        )
        self.sizes = tuple(d.size for d in m.domains)

    @classmethod
    def from_ordering(cls, model: Model, d: Sequence[int], task: Task) -> "Backbone":
        tree = pseudo_tree_of(build_bucket_tree(model, d))
        return cls(model, tree, task, order=d)

    def label(self, x: int, vals: Sequence[int]) -> float:
        """Product of the bucket factors of ``x`` under a full-enough assignment."""
        out = 1.0
        for scope, strides, table in self.bucket[x]:
            idx = 0
            for v, s in zip(scope, strides):
                idx += vals[v] * s
            out *= table[idx]
            if out == 0.0:
                return 0.0
        return out

    def node_key(self, t: TupleKey) -> NodeKey:
        return NodeKey(t.var, tuple(t.values[i] for i in self.and_pos[t.var]))

    def marginalize(self, acc: float, v: float) -> float:
        if self.task is Task.CONSISTENCY:
            return acc if acc >= v else v
        return acc + v
