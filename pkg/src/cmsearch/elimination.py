"""Bucket elimination over a bucket tree, with explored-tuple tracing."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .model import Model, Task
from .propagation import Relation, factor_relation, full_domains, propagate_ac, propagate_fc
from .report import Backbone, Message, RunReport, TupleKey
from .structure import (
    BucketTree,
    ContextTable,
    Ordering,
    PseudoTree,
    dead_cache_vars,
    pseudo_tree_of,
)

LOOKAHEADS = ("none", "fc", "ac")


@dataclass(frozen=True)
class VeOptions:
    forget_layers: bool = False
    zero_skip: bool = True
    lookahead: str = "none"

    def __post_init__(self):
        if self.lookahead not in LOOKAHEADS:
            raise ValueError(f"unknown lookahead {self.lookahead!r}")


def run_ve(model: Model, d: Ordering, task: Task = Task.SUM_PRODUCT, opts: VeOptions = VeOptions()) -> RunReport:
    return eliminate(Backbone.from_ordering(model, d, task), opts)


def run_ve_lah(model: Model, d: Ordering, task: Task = Task.SUM_PRODUCT, prop: str = "fc") -> RunReport:
    if prop not in ("fc", "ac"):
        raise ValueError("look-ahead must be 'fc' or 'ac'")
    return run_ve(model, d, task, VeOptions(zero_skip=True, lookahead=prop))


def _propagate(kind: str, relations: list[Relation], doms):
    if kind == "ac":
        return propagate_ac(relations, doms)
    # no search assignment exists during elimination: singleton domains play
    # the role of assigned variables
    assigned = {v: next(iter(s)) for v, s in enumerate(doms) if len(s) == 1}
    return propagate_fc(relations, doms, assigned)


def eliminate(bb: Backbone, opts: VeOptions = VeOptions()) -> RunReport:
    """Process buckets from last to first in ``bb.order``."""
    model, tree = bb.model, bb.tree
    n = model.n
    sizes = bb.sizes
    children = tree.children
    doms = list(full_domains(model))

    lah = opts.lookahead != "none"
    if lah:
        pending_factors: dict[int, list[Relation]] = {}
        for x, ids in enumerate(bb.placed):
            rels = (factor_relation(model, i) for i in ids)
            pending_factors[x] = [r for r in rels if r is not None]
        live_rels: dict[int, Relation] = {}

        def current_relations():
            out = [r for rs in pending_factors.values() for r in rs]
            out.extend(live_rels.values())
            return out

        res = _propagate(opts.lookahead, current_relations(), doms)
        doms = list(res) if res is not None else [frozenset()] * n

    messages: dict[int, list[float]] = {}
    msg_size: dict[int, int] = {}
    kept: list[Message] = []
    explored: set[TupleKey] = set()
    trace = []
    live = peak = stored = 0
    value = 0.0
    vals = [0] * n

    for x in reversed(bb.order):
        sep = bb.sep[x]
        kids = children[x]
        kid_idx = []
        for w in kids:
            strides = _strides([sizes[v] for v in bb.sep[w]])
            kid_idx.append((messages[w], [(v, s) for v, s in zip(bb.sep[w], strides)]))
        out_strides = _strides([sizes[v] for v in sep])
        table = [0.0] * math.prod(sizes[v] for v in sep)
        ranges = [sorted(doms[v]) for v in sep]
        xs = sorted(doms[x])
        for c in itertools.product(*ranges):
            for v, cv in zip(sep, c):
                vals[v] = cv
            out_i = sum(cv * s for cv, s in zip(c, out_strides))
            acc = table[out_i]
            for xv in xs:
                vals[x] = xv
                incoming = []
                for tab, idx in kid_idx:
                    incoming.append(tab[sum(vals[v] * s for v, s in idx)])
                if opts.zero_skip and any(m == 0.0 for m in incoming):
                    continue
                key = TupleKey(x, c + (xv,))
                explored.add(key)
                val = bb.label(x, vals)
                for m in incoming:
                    val *= m
                trace.append((key, val))
                acc = bb.marginalize(acc, val)
            table[out_i] = acc

        if x == tree.root:
            value = table[0]
        else:
            messages[x] = table
            msg_size[x] = len(table)
            kept.append(Message(x, sep, tuple(table)))
            stored += 1
            live += len(table)
            peak = max(peak, live)
        if opts.forget_layers:
            for w in kids:
                live -= msg_size[w]
        if lah:
            pending_factors.pop(x, None)
            for w in kids:
                live_rels.pop(w, None)
            if x != tree.root:
                allowed = frozenset(
                    t
                    for t, v in zip(itertools.product(*(range(sizes[u]) for u in sep)), table)
                    if v != 0.0
                )
                if len(allowed) < len(table):
                    live_rels[x] = Relation(sep, allowed=allowed)
                res = _propagate(opts.lookahead, current_relations(), doms)
                doms = list(res) if res is not None else [frozenset()] * n

    nodes = frozenset(bb.node_key(t) for t in explored)
    return RunReport(
        value=value,
        explored_tuples=frozenset(explored),
        explored_nodes=nodes,
        tuples_evaluated=len(trace),
        messages_stored=stored,
        peak_live_entries=peak,
        messages=tuple(kept),
        trace=tuple(trace),
        fingerprint=bb.fingerprint,
    )


def _strides(sizes: Sequence[int]) -> list[int]:
    out = [1] * len(sizes)
    for i in range(len(sizes) - 2, -1, -1):
        out[i] = out[i + 1] * sizes[i + 1]
    return out


@dataclass(frozen=True)
class CollapsedTree:
    """Buckets merged along dead-cache chains.

    ``cluster[x]`` is the topmost variable of the merged bucket holding ``x``;
    only messages leaving a cluster are stored.
    """

    cluster: tuple[int, ...]
    parent: dict[int, int | None]  # cluster head -> parent cluster head
    message_scope: dict[int, tuple[int, ...]]

    def members(self, head: int) -> list[int]:
        return [v for v, h in enumerate(self.cluster) if h == head]


def collapse_dead_chains(bt: BucketTree | PseudoTree, ctx: ContextTable) -> CollapsedTree:
    """Merge each dead-cache bucket into its parent when it is the parent's only child.

    Dead caches that branch (subtrees rather than chains) are left alone.
    """
    t = bt if isinstance(bt, PseudoTree) else pseudo_tree_of(bt)
    dead = dead_cache_vars(t, ctx)
    cluster = list(range(t.n))
    for x in t.preorder:
        p = t.parent[x]
        if p is not None and x in dead and len(t.children[p]) == 1:
            cluster[x] = cluster[p]
    heads = sorted(set(cluster))
    parent = {}
    scopes = {}
    for h in heads:
        p = t.parent[h]
        parent[h] = None if p is None else cluster[p]
        if p is not None:
            scopes[h] = ctx.sep[h]
    return CollapsedTree(tuple(cluster), parent, scopes)


def stored_message_entries(model: Model, collapsed: CollapsedTree) -> int:
    """Total table entries of the messages that cross cluster boundaries."""
    return sum(
        math.prod(model.domains[v].size for v in scope)
        for scope in collapsed.message_scope.values()
    )
