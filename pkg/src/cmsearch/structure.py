"""Orderings, induced graphs, bucket trees, pseudo trees and contexts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .model import Graph, Model, primal_graph

Ordering = Sequence[int]


def check_ordering(d: Ordering, n: int) -> tuple[int, ...]:
    d = tuple(d)
    if sorted(d) != list(range(n)):
        raise ValueError(f"ordering must be a permutation of 0..{n - 1}")
    return d


@dataclass(frozen=True)
class InducedGraph:
    adj: tuple[frozenset[int], ...]
    width: int


def induced_graph(g: Graph, d: Ordering) -> InducedGraph:
    d = check_ordering(d, g.n)
    pos = {v: i for i, v in enumerate(d)}
    adj = [set(s) for s in g.adj]
    width = 0
    for v in reversed(d):
        earlier = [u for u in adj[v] if pos[u] < pos[v]]
        width = max(width, len(earlier))
        for i, a in enumerate(earlier):
            for b in earlier[i + 1 :]:
                adj[a].add(b)
                adj[b].add(a)
    return InducedGraph(tuple(frozenset(s) for s in adj), width)


@dataclass(frozen=True)
class BucketTree:
    order: tuple[int, ...]
    parent: tuple[int | None, ...]  # None means ROOT
    placed: tuple[tuple[int, ...], ...]  # factor ids per bucket variable
    message_scope: tuple[tuple[int, ...], ...]  # ordered as in d

    def children(self, x: int) -> list[int]:
        return sorted(v for v, p in enumerate(self.parent) if p == x)


def build_bucket_tree(model: Model, d: Ordering) -> BucketTree:
    d = check_ordering(d, model.n)
    pos = {v: i for i, v in enumerate(d)}
    placed: list[list[int]] = [[] for _ in range(model.n)]
    for i, f in enumerate(model.factors):
        home = max(f.scope, key=pos.__getitem__) if f.scope else d[0]
        placed[home].append(i)
    incoming: list[set[int]] = [set() for _ in range(model.n)]
    parent: list[int | None] = [None] * model.n
    scopes: list[tuple[int, ...]] = [()] * model.n
    for x in reversed(d):
        vars_ = set(incoming[x])
        for i in placed[x]:
            vars_.update(model.factors[i].scope)
        vars_.discard(x)
        scope = tuple(sorted(vars_, key=pos.__getitem__))
        scopes[x] = scope
        if scope:
            p = scope[-1]
            parent[x] = p
            incoming[p].update(scope)
    return BucketTree(d, tuple(parent), tuple(tuple(p) for p in placed), tuple(scopes))


@dataclass(frozen=True)
class PseudoTree:
    parent: tuple[int | None, ...]
    root: int

    def __post_init__(self):
        roots = [v for v, p in enumerate(self.parent) if p is None]
        if roots != [self.root]:
            raise ValueError("pseudo tree must have exactly one root")
        for v in range(self.n):  # cycle check
            seen = set()
            while v is not None:
                if v in seen:
                    raise ValueError("parent array contains a cycle")
                seen.add(v)
                v = self.parent[v]

    @property
    def n(self) -> int:
        return len(self.parent)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        ch: list[list[int]] = [[] for _ in range(self.n)]
        for v, p in enumerate(self.parent):
            if p is not None:
                ch[p].append(v)
        return tuple(tuple(sorted(c)) for c in ch)

    @cached_property
    def depth(self) -> tuple[int, ...]:
        out = [0] * self.n
        for v in self.preorder:
            p = self.parent[v]
            out[v] = 0 if p is None else out[p] + 1
        return tuple(out)

    @cached_property
    def preorder(self) -> tuple[int, ...]:
        out, stack = [], [self.root]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.children[v]))
        return tuple(out)

    @cached_property
    def ancestors(self) -> tuple[tuple[int, ...], ...]:
        """Strict ancestors of each variable, root first."""
        out: list[tuple[int, ...]] = [()] * self.n
        for v in self.preorder:
            p = self.parent[v]
            out[v] = () if p is None else out[p] + (p,)
        return tuple(out)

    @cached_property
    def descendants(self) -> tuple[frozenset[int], ...]:
        out: list[set[int]] = [set() for _ in range(self.n)]
        for v in reversed(self.preorder):
            p = self.parent[v]
            if p is not None:
                out[p].add(v)
                out[p].update(out[v])
        return tuple(frozenset(s) for s in out)

    @cached_property
    def height(self) -> int:
        return max(self.depth, default=0)

    def is_ancestor(self, a: int, v: int) -> bool:
        return a in self.ancestors[v]


def pseudo_tree_of(bt: BucketTree) -> PseudoTree:
    roots = [v for v in bt.order if bt.parent[v] is None]
    root = roots[0]
    parent = list(bt.parent)
    for v in roots[1:]:
        parent[v] = root
    return PseudoTree(tuple(parent), root)


def dfs_pseudo_tree(g: Graph, root: int = 0) -> PseudoTree:
    """Depth-first traversal tree of ``g``; later components hang under ``root``."""
    parent: list[int | None] = [None] * g.n
    seen = [False] * g.n
    for start in [root] + [v for v in range(g.n) if v != root]:
        if seen[start]:
            continue
        seen[start] = True
        if start != root:
            parent[start] = root
        stack = [(start, iter(sorted(g.adj[start])))]
        while stack:
            v, it = stack[-1]
            for w in it:
                if not seen[w]:
                    seen[w] = True
                    parent[w] = v
                    stack.append((w, iter(sorted(g.adj[w]))))
                    break
            else:
                stack.pop()
    return PseudoTree(tuple(parent), root)


def validate_pseudo_tree(t: PseudoTree, g: Graph) -> bool:
    if t.n != g.n:
        return False
    return all(t.is_ancestor(u, v) or t.is_ancestor(v, u) for u, v in g.edges())


def separator_context(t: PseudoTree, g: Graph, x: int) -> tuple[int, ...]:
    below = t.descendants[x] | {x}
    return tuple(a for a in t.ancestors[x] if g.adj[a] & below)


def and_context(t: PseudoTree, g: Graph, x: int) -> tuple[int, ...]:
    below = t.descendants[x]
    return tuple(a for a in t.ancestors[x] if g.adj[a] & below) + (x,)


@dataclass(frozen=True)
class ContextTable:
    sep: tuple[tuple[int, ...], ...]
    andctx: tuple[tuple[int, ...], ...]


def contexts(t: PseudoTree, g: Graph) -> ContextTable:
    return ContextTable(
        tuple(separator_context(t, g, x) for x in range(t.n)),
        tuple(and_context(t, g, x) for x in range(t.n)),
    )


def dead_cache_vars(t: PseudoTree, ctx: ContextTable) -> set[int]:
    """Variables whose cache can never be hit.

    A non-root variable is a dead cache when its context contains its
    parent's context plus the parent itself: every context instance is then
    reached through a single parent node.
    """
    dead = set()
    for x, p in enumerate(t.parent):
        if p is not None and set(ctx.sep[x]) >= set(ctx.sep[p]) | {p}:
            dead.add(x)
    return dead


def is_dfs_tree(t: PseudoTree, g: Graph, ctx: ContextTable | None = None) -> bool:
    """Whether ``t`` could have been produced by a depth-first traversal of ``g``.

    Every tree arc must be a graph edge, except arcs that hang an independent
    component (empty separator) under the root.
    """
    if not validate_pseudo_tree(t, g):
        return False
    ctx = ctx or contexts(t, g)
    return all(
        g.has_edge(p, c) or not ctx.sep[c]
        for c, p in enumerate(t.parent)
        if p is not None
    )


def graph_ancestors(t: PseudoTree, g: Graph, x: int) -> tuple[int, ...]:
    return tuple(a for a in t.ancestors[x] if g.has_edge(a, x))


def context_size(model: Model, scope: Sequence[int]) -> int:
    return math.prod(model.domains[v].size for v in scope)


@dataclass(frozen=True)
class TreeStats:
    width: int
    depth: int
    cm_bound: int
    is_dfs_tree: bool
    dead_caches: frozenset[int]
    tree: PseudoTree
    contexts: ContextTable


def tree_stats(model: Model, d: Ordering) -> TreeStats:
    g = primal_graph(model)
    t = pseudo_tree_of(build_bucket_tree(model, d))
    ctx = contexts(t, g)
    return TreeStats(
        width=induced_graph(g, d).width,
        depth=t.height,
        cm_bound=sum(context_size(model, s) for s in ctx.sep),
        is_dfs_tree=is_dfs_tree(t, g, ctx),
        dead_caches=frozenset(dead_cache_vars(t, ctx)),
        tree=t,
        contexts=ctx,
    )
