"""Brute-force oracles, explicit context-minimal graphs, trace comparison and DOT export.

Everything here is computed by direct enumeration and deliberately shares no
code path with the elimination or search engines beyond the model itself.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .model import Model, Task, evaluate_factor, functional_factors, primal_graph, with_evidence
from .report import NodeKey, RunReport, TupleKey
from .structure import ContextTable, PseudoTree, contexts

SIZE_GUARD = 10**7


class SizeGuardError(RuntimeError):
    pass


def _check_size(count: int, what: str) -> None:
    if count > SIZE_GUARD:
        raise SizeGuardError(f"{what}: {count} items exceeds the guard of {SIZE_GUARD}")


def brute_force_value(model: Model, task: Task = Task.SUM_PRODUCT) -> float | int:
    model = functional_factors(with_evidence(model), task)
    shape = tuple(d.size for d in model.domains)
    _check_size(math.prod(shape), "full joint")
    joint = np.ones(shape, dtype=np.float64)
    for f in model.factors:
        table = np.asarray(f.table, dtype=np.float64).reshape(
            [model.domains[v].size for v in f.scope]
        )
        order = sorted(range(len(f.scope)), key=lambda i: f.scope[i])
        table = table.transpose(order)
        expand = [1] * model.n
        for v in f.scope:
            expand[v] = model.domains[v].size
        joint = joint * table.reshape(expand)
    if task is Task.SUM_PRODUCT:
        return float(joint.sum())
    nonzero = int(np.count_nonzero(joint))
    if task is Task.COUNT:
        return nonzero
    return int(nonzero > 0)


@dataclass
class CmGraph:
    or_nodes: set[tuple[int, tuple[int, ...]]] = field(default_factory=set)
    and_nodes: set[NodeKey] = field(default_factory=set)
    tuples: set[TupleKey] = field(default_factory=set)
    or_and: set[tuple[tuple[int, tuple[int, ...]], NodeKey]] = field(default_factory=set)
    and_or: set[tuple[NodeKey, tuple[int, tuple[int, ...]]]] = field(default_factory=set)
    names: tuple[str, ...] = ()
    labels: tuple[tuple[str, ...], ...] = ()


def _project(scope_from: tuple[int, ...], values: tuple[int, ...], scope_to: tuple[int, ...]) -> tuple[int, ...]:
    where = dict(zip(scope_from, values))
    return tuple(where[v] for v in scope_to)


def build_cm(model: Model, t: PseudoTree, ctx: ContextTable | None = None) -> CmGraph:
    """The full context-minimal graph; structure only, factor values ignored."""
    ctx = ctx or contexts(t, primal_graph(model))
    sizes = [d.size for d in model.domains]
    _check_size(sum(math.prod(sizes[v] for v in s) * sizes[x] for x, s in enumerate(ctx.sep)),
                "context-minimal graph")
    g = CmGraph(
        names=tuple(model.var_name(v) for v in range(model.n)),
        labels=tuple(tuple(d.label(i) for i in range(d.size)) for d in model.domains),
    )
    for x in range(model.n):
        sep = ctx.sep[x]
        scope = sep + (x,)
        for c in itertools.product(*(range(sizes[v]) for v in sep)):
            g.or_nodes.add((x, c))
            for v in range(sizes[x]):
                values = c + (v,)
                g.tuples.add(TupleKey(x, values))
                node = NodeKey(x, _project(scope, values, ctx.andctx[x]))
                g.and_nodes.add(node)
                g.or_and.add(((x, c), node))
                for w in t.children[x]:
                    g.and_or.add((node, (w, _project(scope, values, ctx.sep[w]))))
    return g


@dataclass(frozen=True)
class ExploredSets:
    ao_tuples: frozenset[TupleKey]
    ve_tuples: frozenset[TupleKey]
    bf_nodes: frozenset[NodeKey]

    def node_projection(self, tuples, ctx: ContextTable) -> frozenset[NodeKey]:
        return frozenset(
            NodeKey(t.var, _project(ctx.sep[t.var] + (t.var,), t.values, ctx.andctx[t.var]))
            for t in tuples
        )


def _factors_completed_at(model: Model, t: PseudoTree) -> list[list[int]]:
    """Per variable, the factors whose scope becomes fully assigned there on a root path."""
    out: list[list[int]] = [[] for _ in range(model.n)]
    for i, f in enumerate(model.factors):
        if f.scope:
            out[max(f.scope, key=lambda v: t.depth[v])].append(i)
    return out


def oracle_explored_sets(model: Model, t: PseudoTree, ctx: ContextTable | None = None) -> ExploredSets:
    """Explored tuple sets of top-down search and bottom-up elimination, by enumeration.

    * top-down: a tuple is reached when some consistent assignment of the
      variable's root path (the variable included) projects onto it;
    * bottom-up: a tuple survives when every child subproblem has a
      consistent extension under it;
    * the backtrack-free nodes are the projections of full solutions.
    """
    model = with_evidence(model)
    ctx = ctx or contexts(t, primal_graph(model))
    sizes = [d.size for d in model.domains]
    _check_size(sum(math.prod(sizes[v] for v in s) * sizes[x] for x, s in enumerate(ctx.sep)),
                "context-minimal graph")
    _check_size(math.prod(sizes), "full assignment space")
    completed = _factors_completed_at(model, t)

    def ok_at(x: int, a: Mapping[int, int]) -> bool:
        return all(evaluate_factor(model, i, a) != 0.0 for i in completed[x])

    # top-down: consistent root paths, level by level
    ao: set[TupleKey] = set()
    paths: dict[int, list[dict[int, int]]] = {}
    for x in t.preorder:
        p = t.parent[x]
        prefixes = [{}] if p is None else paths[p]
        mine = []
        for a in prefixes:
            for v in range(sizes[x]):
                b = dict(a)
                b[x] = v
                if ok_at(x, b):
                    mine.append(b)
                    ao.add(TupleKey(x, tuple(b[u] for u in ctx.sep[x]) + (v,)))
        paths[x] = mine

    # bottom-up: does the subtree of w extend an assignment of its separator?
    memo: dict[tuple[int, tuple[int, ...]], bool] = {}

    def extends(w: int, a: dict[int, int]) -> bool:
        key = (w, tuple(a[u] for u in ctx.sep[w]))
        if key not in memo:
            memo[key] = _has_extension(list(_subtree_preorder(t, w)), dict(a), 0, ok_at, sizes)
        return memo[key]

    ve: set[TupleKey] = set()
    for x in range(model.n):
        sep = ctx.sep[x]
        for c in itertools.product(*(range(sizes[v]) for v in sep)):
            for v in range(sizes[x]):
                a = dict(zip(sep, c))
                a[x] = v
                if all(extends(w, a) for w in t.children[x]):
                    ve.add(TupleKey(x, c + (v,)))

    # full solutions, enumerated along the tree's preorder
    bf: set[NodeKey] = set()
    for sol in _solutions(list(t.preorder), ok_at, sizes):
        for x in range(model.n):
            bf.add(NodeKey(x, tuple(sol[u] for u in ctx.andctx[x])))
    return ExploredSets(frozenset(ao), frozenset(ve), frozenset(bf))


def _subtree_preorder(t: PseudoTree, w: int):
    stack = [w]
    while stack:
        v = stack.pop()
        yield v
        stack.extend(reversed(t.children[v]))


def _has_extension(order, a, i, ok_at, sizes) -> bool:
    if i == len(order):
        return True
    x = order[i]
    for v in range(sizes[x]):
        a[x] = v
        if ok_at(x, a) and _has_extension(order, a, i + 1, ok_at, sizes):
            del a[x]
            return True
    a.pop(x, None)
    return False


def _solutions(order, ok_at, sizes):
    a: dict[int, int] = {}

    def rec(i):
        if i == len(order):
            yield dict(a)
            return
        x = order[i]
        for v in range(sizes[x]):
            a[x] = v
            if ok_at(x, a):
                yield from rec(i + 1)
        a.pop(x, None)

    yield from rec(0)


class Comparison(enum.Enum):
    IDENTICAL = "identical"
    A_STRICT_SUBSET = "a-subset-b"
    B_STRICT_SUBSET = "b-subset-a"
    INCOMPARABLE = "incomparable"


def compare(a: RunReport, b: RunReport) -> Comparison:
    if a.fingerprint != b.fingerprint:
        raise ValueError("reports come from different models or pseudo trees")
    ta, tb = a.explored_tuples, b.explored_tuples
    if ta == tb:
        return Comparison.IDENTICAL
    if ta < tb:
        return Comparison.A_STRICT_SUBSET
    if tb < ta:
        return Comparison.B_STRICT_SUBSET
    return Comparison.INCOMPARABLE


def marks_from_report(g: CmGraph, report: RunReport) -> dict:
    """Explored flags keyed ``("and", node)``, ``("tuple", key)`` and ``("or", node)``.

    The kinds are kept apart because AND keys, tuple keys and OR keys are
    all plain tuples and can coincide.
    """
    reached = {(tk.var, tk.values[:-1]) for tk in report.explored_tuples}
    marks: dict = {}
    marks.update((("and", node), node in report.explored_nodes) for node in g.and_nodes)
    marks.update((("tuple", tk), tk in report.explored_tuples) for tk in g.tuples)
    marks.update((("or", orn), orn in reached) for orn in g.or_nodes)
    return marks


def export_dot(g: CmGraph, marks: Mapping | None = None) -> str:
    """Render the graph in DOT; anything marked unexplored is drawn dashed."""
    marks = marks or {}

    def name(v: int) -> str:
        return g.names[v] if g.names else str(v)

    def style(kind: str, key) -> str:
        return "dashed" if marks.get((kind, key), True) is False else "solid"

    or_sorted = sorted(g.or_nodes)
    and_sorted = sorted(g.and_nodes)
    ids = {("or",) + k: f"o{i}" for i, k in enumerate(or_sorted)}
    ids.update({("and",) + tuple(k): f"a{i}" for i, k in enumerate(and_sorted)})
    lines = ["digraph cm {", "  rankdir=TB;"]
    for k in or_sorted:
        lines.append(f'  {ids[("or",) + k]} [shape=ellipse, label="{name(k[0])}", style={style("or", k)}];')
    for k in and_sorted:
        label = g.labels[k.var][k.values[-1]] if g.labels else str(k.values[-1])
        lines.append(
            f'  {ids[("and",) + tuple(k)]} [shape=box, label="{name(k.var)}={label}", style={style("and", k)}];'
        )
    # each OR->AND arc carries exactly one tuple: the OR context plus the value
    for orn, node in sorted(g.or_and):
        tk = TupleKey(orn[0], orn[1] + (node.values[-1],))
        lines.append(f'  {ids[("or",) + orn]} -> {ids[("and",) + tuple(node)]} [style={style("tuple", tk)}];')
    for node, orn in sorted(g.and_or):
        st = "dashed" if "dashed" in (style("and", node), style("or", orn)) else "solid"
        lines.append(f'  {ids[("and",) + tuple(node)]} -> {ids[("or",) + orn]} [style={st}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
