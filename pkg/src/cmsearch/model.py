"""Discrete graphical models: factors, flat constraints and primal graphs.

Factor tables are stored row-major with the last scope variable varying
fastest.  A table entry of exactly ``0.0`` marks an inconsistent tuple; the
set of nonzero tuples of a factor is its flat constraint.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

Assignment = Mapping[int, int]


class ModelFormatError(ValueError):
    """Raised for malformed model text; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Task(enum.Enum):
    SUM_PRODUCT = "sum-product"
    COUNT = "count"
    CONSISTENCY = "consistency"


@dataclass(frozen=True)
class Domain:
    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("domain size must be >= 1")
        if self.labels is not None:
            if len(self.labels) != self.size:
                raise ValueError("label count must equal domain size")
            if len(set(self.labels)) != self.size:
                raise ValueError("domain labels must be unique")

    def label(self, value: int) -> str:
        if self.labels is None:
            return str(value)
        return self.labels[value]


@dataclass(frozen=True)
class Factor:
    scope: tuple[int, ...]
    table: tuple[float, ...]

    def __post_init__(self):
        if len(set(self.scope)) != len(self.scope):
            raise ValueError("duplicate scope variable")
        for v in self.table:
            if not (v >= 0.0 and math.isfinite(v)):
                raise ValueError(f"invalid table entry {v!r}")


@dataclass(frozen=True)
class FlatRelation:
    scope: tuple[int, ...]
    allowed: frozenset[tuple[int, ...]]


@dataclass(frozen=True)
class Graph:
    """Undirected graph on vertices ``0..n-1``."""

    n: int
    adj: tuple[frozenset[int], ...]

    def edges(self) -> set[tuple[int, int]]:
        return {(u, v) for u in range(self.n) for v in self.adj[u] if u < v}

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]


@dataclass(frozen=True)
class Model:
    name: str
    domains: tuple[Domain, ...]
    factors: tuple[Factor, ...]
    evidence: tuple[tuple[int, int], ...] = ()
    names: tuple[str, ...] | None = None
    _strides: tuple[tuple[int, ...], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        n = len(self.domains)
        if self.names is not None and len(self.names) != n:
            raise ValueError("one name per variable required")
        strides = []
        for f in self.factors:
            for v in f.scope:
                if not 0 <= v < n:
                    raise ValueError(f"variable index {v} out of range")
            sizes = [self.domains[v].size for v in f.scope]
            if len(f.table) != math.prod(sizes):
                raise ValueError("table length mismatch")
            strides.append(_row_major_strides(sizes))
        for var, val in self.evidence:
            if not 0 <= var < n:
                raise ValueError(f"evidence variable {var} out of range")
            if not 0 <= val < self.domains[var].size:
                raise ValueError(f"evidence value {val} out of range")
        object.__setattr__(self, "_strides", tuple(strides))

    @property
    def n(self) -> int:
        return len(self.domains)

    def var_name(self, v: int) -> str:
        if self.names is not None:
            return self.names[v]
        return str(v)

    def var_index(self, token: str) -> int:
        """Resolve a variable name or integer index."""
        if self.names is not None and token in self.names:
            return self.names.index(token)
        try:
            v = int(token)
        except ValueError:
            raise KeyError(f"unknown variable {token!r}") from None
        if not 0 <= v < self.n:
            raise KeyError(f"variable index {v} out of range")
        return v

    def table_index(self, f: int, values: Sequence[int]) -> int:
        return sum(s * x for s, x in zip(self._strides[f], values))

    def max_domain(self) -> int:
        return max((d.size for d in self.domains), default=1)


def _row_major_strides(sizes: Sequence[int]) -> tuple[int, ...]:
    strides = [1] * len(sizes)
    for i in range(len(sizes) - 2, -1, -1):
        strides[i] = strides[i + 1] * sizes[i + 1]
    return tuple(strides)


def scope_assignments(model: Model, scope: Sequence[int]) -> Iterable[tuple[int, ...]]:
    """All tuples over ``scope`` in row-major order."""
    return itertools.product(*(range(model.domains[v].size) for v in scope))


def evaluate_factor(model: Model, f: int, a: Assignment) -> float:
    factor = model.factors[f]
    try:
        values = [a[v] for v in factor.scope]
    except KeyError as e:
        raise KeyError(f"scope variable {e.args[0]} is unassigned") from None
    return factor.table[model.table_index(f, values)]


def flat_relation(model: Model, f: int) -> FlatRelation:
    factor = model.factors[f]
    allowed = frozenset(
        t
        for t, v in zip(scope_assignments(model, factor.scope), factor.table)
        if v != 0.0
    )
    return FlatRelation(factor.scope, allowed)


def is_consistent(model: Model, a: Assignment) -> bool:
    for i, factor in enumerate(model.factors):
        if all(v in a for v in factor.scope):
            if evaluate_factor(model, i, a) == 0.0:
                return False
    return True


def primal_graph(model: Model) -> Graph:
    adj: list[set[int]] = [set() for _ in range(model.n)]
    for factor in model.factors:
        for u, v in itertools.combinations(factor.scope, 2):
            adj[u].add(v)
            adj[v].add(u)
    return Graph(model.n, tuple(frozenset(s) for s in adj))


def is_strictly_positive(model: Model) -> bool:
    return all(v > 0.0 for f in model.factors for v in f.table)


def apply_evidence(model: Model, e: Assignment | Iterable[tuple[int, int]]) -> Model:
    """Zero every table entry that disagrees with the evidence.

    A variable that appears in no factor gets a 0/1 indicator factor so the
    evidence still constrains it.
    """
    items = dict(e.items() if isinstance(e, Mapping) else e)
    for var, val in items.items():
        if not 0 <= var < model.n:
            raise ValueError(f"evidence variable {var} out of range")
        if not 0 <= val < model.domains[var].size:
            raise ValueError(f"evidence value {val} out of range")
    if not items:
        return model
    factors = []
    covered = set()
    for factor in model.factors:
        pos = [(i, items[v]) for i, v in enumerate(factor.scope) if v in items]
        covered.update(v for v in factor.scope if v in items)
        if not pos:
            factors.append(factor)
            continue
        table = [
            val if all(t[i] == x for i, x in pos) else 0.0
            for t, val in zip(scope_assignments(model, factor.scope), factor.table)
        ]
        factors.append(Factor(factor.scope, tuple(table)))
    for var in sorted(set(items) - covered):
        size = model.domains[var].size
        table = tuple(1.0 if x == items[var] else 0.0 for x in range(size))
        factors.append(Factor((var,), table))
    merged = dict(model.evidence)
    merged.update(items)
    return Model(
        model.name,
        model.domains,
        tuple(factors),
        tuple(sorted(merged.items())),
        model.names,
    )


def with_evidence(model: Model) -> Model:
    """The model with its own recorded evidence folded into the tables."""
    return apply_evidence(model, model.evidence)


def functional_factors(model: Model, task: Task) -> Model:
    """Route factors through their flat constraint for counting tasks."""
    if task is Task.SUM_PRODUCT:
        return model
    factors = tuple(
        Factor(f.scope, tuple(1.0 if v != 0.0 else 0.0 for v in f.table))
        for f in model.factors
    )
    return Model(model.name, model.domains, factors, model.evidence, model.names)


# -- text format ------------------------------------------------------------


def parse_model(text: str) -> Model:
    """Parse the line-oriented model format.

    ``dom`` lines may carry an optional variable name followed by one label
    per value.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].split()
        if body:
            lines.append((lineno, body))
    it = iter(lines)

    def expect(keyword: str):
        try:
            lineno, toks = next(it)
        except StopIteration:
            raise ModelFormatError(f"unexpected end of input, expected {keyword!r}") from None
        if toks[0] != keyword:
            raise ModelFormatError(f"expected {keyword!r}, got {toks[0]!r}", lineno)
        return lineno, toks

    def as_int(tok: str, lineno: int) -> int:
        try:
            return int(tok)
        except ValueError:
            raise ModelFormatError(f"expected integer, got {tok!r}", lineno) from None

    lineno, toks = expect("model")
    name = toks[1] if len(toks) > 1 else ""
    lineno, toks = expect("vars")
    if len(toks) != 2:
        raise ModelFormatError("'vars' takes one count", lineno)
    n = as_int(toks[1], lineno)
    if n < 0:
        raise ModelFormatError("negative variable count", lineno)

    domains: list[Domain | None] = [None] * n
    names: list[str | None] = [None] * n
    for _ in range(n):
        lineno, toks = expect("dom")
        if len(toks) < 3:
            raise ModelFormatError("'dom' needs an index and a size", lineno)
        var, size = as_int(toks[1], lineno), as_int(toks[2], lineno)
        if not 0 <= var < n:
            raise ModelFormatError(f"variable index {var} out of range", lineno)
        if domains[var] is not None:
            raise ModelFormatError(f"variable {var} declared twice", lineno)
        extra = toks[3:]
        if extra:
            names[var] = extra[0]
        labels = tuple(extra[1:]) or None
        try:
            domains[var] = Domain(size, labels)
        except ValueError as e:
            raise ModelFormatError(str(e), lineno) from None

    factors: list[Factor] = []
    evidence: dict[int, int] = {}
    pending: list[str] = []
    saw_end = False
    while True:
        try:
            lineno, toks = next(it)
        except StopIteration:
            break
        head = toks[0]
        if head == "end":
            saw_end = True
            break
        if head == "evidence":
            if len(toks) != 3:
                raise ModelFormatError("'evidence' takes a variable and a value", lineno)
            var, val = as_int(toks[1], lineno), as_int(toks[2], lineno)
            if not 0 <= var < n:
                raise ModelFormatError(f"variable index {var} out of range", lineno)
            if not 0 <= val < domains[var].size:
                raise ModelFormatError(f"evidence value {val} out of range", lineno)
            evidence[var] = val
            continue
        if head != "factor":
            raise ModelFormatError(f"unexpected keyword {head!r}", lineno)
        factor_line = lineno
        arity = as_int(toks[1], lineno) if len(toks) > 1 else -1
        if arity < 0 or len(toks) < 2 + arity:
            raise ModelFormatError("malformed factor header", lineno)
        scope = tuple(as_int(t, lineno) for t in toks[2 : 2 + arity])
        for v in scope:
            if not 0 <= v < n:
                raise ModelFormatError(f"variable index {v} out of range", lineno)
        if len(set(scope)) != len(scope):
            raise ModelFormatError("duplicate scope variable", lineno)
        need = math.prod(domains[v].size for v in scope)
        pending = list(toks[2 + arity :])
        while len(pending) < need:
            try:
                lineno, toks = next(it)
            except StopIteration:
                raise ModelFormatError("table length mismatch", factor_line) from None
            if toks[0] in ("factor", "evidence", "end"):
                raise ModelFormatError("table length mismatch", factor_line)
            pending.extend(toks)
        if len(pending) != need:
            raise ModelFormatError("table length mismatch", factor_line)
        table = []
        for tok in pending:
            try:
                v = float(tok)
            except ValueError:
                raise ModelFormatError(f"bad table value {tok!r}", lineno) from None
            if v < 0.0:
                raise ModelFormatError("negative table entry", lineno)
            if not math.isfinite(v):
                raise ModelFormatError("non-finite table entry", lineno)
            table.append(v)
        factors.append(Factor(scope, tuple(table)))
    if not saw_end:
        raise ModelFormatError("missing 'end'")
    for lineno, toks in it:
        raise ModelFormatError("content after 'end'", lineno)

    if any(nm is not None for nm in names):
        final_names = tuple(nm if nm is not None else str(i) for i, nm in enumerate(names))
        if len(set(final_names)) != n:
            raise ModelFormatError("variable names must be unique")
    else:
        final_names = None
    return Model(name, tuple(domains), tuple(factors), tuple(sorted(evidence.items())), final_names)


def _fmt(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def render_factor(scope: Sequence[int], table: Sequence[float], width: int | None = None) -> str:
    head = " ".join(["factor", str(len(scope)), *map(str, scope)])
    width = width or max(1, len(table))
    rows = [
        " ".join(_fmt(v) for v in table[i : i + width])
        for i in range(0, len(table), width)
    ] or [""]
    return "\n".join([head, *(r for r in rows if r)])


def render_model(model: Model) -> str:
    out = [f"model {model.name}".rstrip(), f"vars {model.n}"]
    for i, d in enumerate(model.domains):
        line = f"dom {i} {d.size}"
        if model.names is not None or d.labels is not None:
            line += " " + model.var_name(i)
        if d.labels is not None:
            line += " " + " ".join(d.labels)
        out.append(line)
    for f in model.factors:
        last = model.domains[f.scope[-1]].size if f.scope else 1
        out.append(render_factor(f.scope, f.table, last))
    for var, val in model.evidence:
        out.append(f"evidence {var} {val}")
    out.append("end")
    return "\n".join(out) + "\n"
