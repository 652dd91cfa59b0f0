"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 model-format error, 3 size guard.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analysis import (
    SIZE_GUARD,
    SizeGuardError,
    build_cm,
    compare,
    export_dot,
    marks_from_report,
)
from .aosearch import AoOptions, ao_bf, ao_df
from .elimination import VeOptions, eliminate
from .generators import GENERATORS, GenSpec, generate
from .model import Model, ModelFormatError, Task, parse_model, render_factor
from .report import Backbone, RunReport
from .structure import check_ordering, context_size, tree_stats

EXIT_OK, EXIT_USAGE, EXIT_FORMAT, EXIT_GUARD = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load(path: str) -> tuple[Model, str]:
    try:
        text = Path(path).read_text() if path != "-" else sys.stdin.read()
    except OSError as e:
        raise UsageError(f"cannot read model: {e}") from None
    return parse_model(text), text


def _ordering(model: Model, text: str, arg: str | None) -> tuple[int, ...]:
    spec = arg
    if spec is None:
        # fall back to the '# ordering' comment written by `gen`
        for line in text.splitlines():
            s = line.strip()
            if s.startswith("# ordering"):
                spec = s[len("# ordering"):].strip()
                break
    if not spec:
        return tuple(range(model.n))
    try:
        d = tuple(model.var_index(tok.strip()) for tok in spec.split(","))
        return check_ordering(d, model.n)
    except (ValueError, KeyError) as e:
        raise UsageError(f"bad ordering {spec!r}: {e}") from None


def parse_algo(spec: str) -> tuple[str, object]:
    """``ve[:forget,noskip,lookahead=fc]`` or ``ao-df|ao-bf[:cache=none,lookahead=fc,nogood,gbj,la-nogoods]``."""
    name, _, rest = spec.partition(":")
    opts = {}
    for item in filter(None, rest.split(",")):
        k, eq, v = item.partition("=")
        opts[k.strip()] = v.strip() if eq else True
    try:
        if name == "ve":
            unknown = set(opts) - {"forget", "noskip", "lookahead"}
            if unknown:
                raise ValueError(f"unknown option(s) {sorted(unknown)}")
            return name, VeOptions(
                forget_layers=bool(opts.get("forget", False)),
                zero_skip=not opts.get("noskip", False),
                lookahead=opts.get("lookahead", "none"),
            )
        if name in ("ao-df", "ao-bf"):
            unknown = set(opts) - {"cache", "lookahead", "nogood", "gbj", "la-nogoods"}
            if unknown:
                raise ValueError(f"unknown option(s) {sorted(unknown)}")
            return name, AoOptions(
                caching=opts.get("cache", "full"),
                lookahead=opts.get("lookahead", "none"),
                nogood=bool(opts.get("nogood", False)),
                gbj=bool(opts.get("gbj", False)),
                lookahead_uses_nogoods=bool(opts.get("la-nogoods", False)),
            )
    except ValueError as e:
        raise UsageError(f"algorithm {spec!r}: {e}") from None
    raise UsageError(f"unknown algorithm {name!r}")


def _guard(model: Model, bb: Backbone) -> None:
    total = sum(context_size(model, s) * model.domains[x].size for x, s in enumerate(bb.sep))
    if total > SIZE_GUARD:
        raise SizeGuardError(f"context-minimal graph has {total} tuples, above {SIZE_GUARD}")


def run_algo(model: Model, d, task: Task, name: str, opts) -> RunReport:
    bb = Backbone.from_ordering(model, d, task)
    _guard(model, bb)
    if name == "ve":
        return eliminate(bb, opts)
    if name == "ao-df":
        return ao_df(bb, opts=opts)
    try:
        return ao_bf(bb, opts=opts)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _fmt_value(v: float, task: Task) -> str:
    if task is not Task.SUM_PRODUCT:
        return str(int(v))
    return repr(float(v))


def _report_lines(r: RunReport, task: Task, name: str) -> list[str]:
    lines = [
        f"value={_fmt_value(r.value, task)}",
        f"tuples={len(r.explored_tuples)}",
        f"nodes={len(r.explored_nodes)}",
        f"peak_entries={r.peak_live_entries}",
        f"messages={r.messages_stored}",
    ]
    if name != "ve":
        lines += [f"cache_hits={r.cache_hits}", f"cache_entries={r.cache_entries}"]
    return lines


# -- subcommands ---------------------------------------------------------------


def cmd_gen(a) -> int:
    try:
        spec = GenSpec(a.name, n=a.n, k=a.k, seed=a.seed, uniform=a.uniform, zeros=a.zeros, kind=a.kind)
    except ValueError as e:
        raise UsageError(str(e)) from None
    text = generate(spec).text()
    if a.out:
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_stats(a) -> int:
    model, text = _load(a.model)
    d = _ordering(model, text, a.ordering)
    st = tree_stats(model, d)
    name = model.var_name
    dead = ",".join(name(v) for v in sorted(st.dead_caches, key=d.index))
    print(f"width={st.width} depth={st.depth} cm_bound={st.cm_bound} "
          f"dfs_tree={int(st.is_dfs_tree)} dead_caches={dead}")
    for x in d:
        sep = ",".join(name(v) for v in st.contexts.sep[x])
        andc = ",".join(name(v) for v in st.contexts.andctx[x])
        print(f"ctx {name(x)} sep={sep} and={andc}")
    return EXIT_OK


def cmd_solve(a) -> int:
    model, text = _load(a.model)
    d = _ordering(model, text, a.ordering)
    task = Task(a.task)
    name, opts = parse_algo(_algo_from_flags(a))
    r = run_algo(model, d, task, name, opts)
    print("\n".join(_report_lines(r, task, name)))
    if a.dump_messages:
        with open(a.dump_messages, "w") as fh:
            for m in r.messages:
                fh.write(f"# message from {model.var_name(m.source)}\n")
                width = model.domains[m.scope[-1]].size if m.scope else 1
                fh.write(render_factor(m.scope, m.table, width) + "\n")
    if a.dump_trace:
        with open(a.dump_trace, "w") as fh:
            for key, label in r.trace:
                ctx = " ".join(map(str, key.values[:-1])) or "-"
                fh.write(f"{model.var_name(key.var)} {ctx} {key.values[-1]} {label!r}\n")
    return EXIT_OK


def _algo_from_flags(a) -> str:
    if ":" in a.algo:
        return a.algo
    parts = []
    if a.algo == "ve":
        if a.forget_layers:
            parts.append("forget")
        if a.no_zero_skip:
            parts.append("noskip")
        if a.lookahead != "none":
            parts.append(f"lookahead={a.lookahead}")
    else:
        parts.append(f"cache={a.cache}")
        parts.append(f"lookahead={a.lookahead}")
        parts += [flag for flag, on in (("nogood", a.nogood), ("gbj", a.gbj), ("la-nogoods", a.la_nogoods)) if on]
    return a.algo + (":" + ",".join(parts) if parts else "")


def cmd_compare(a) -> int:
    model, text = _load(a.model)
    d = _ordering(model, text, a.ordering)
    task = Task(a.task)
    ra = run_algo(model, d, task, *parse_algo(a.algo_a))
    rb = run_algo(model, d, task, *parse_algo(a.algo_b))
    rel = compare(ra, rb)
    ta, tb = ra.explored_tuples, rb.explored_tuples
    print(f"relation={rel.value}")
    print(f"only_a={len(ta - tb)} only_b={len(tb - ta)} both={len(ta & tb)}")
    return EXIT_OK


def cmd_dot(a) -> int:
    model, text = _load(a.model)
    d = _ordering(model, text, a.ordering)
    task = Task(a.task)
    bb = Backbone.from_ordering(model, d, task)
    g = build_cm(model, bb.tree, bb.ctx)
    marks = None
    if a.algo:
        marks = marks_from_report(g, run_algo(model, d, task, *parse_algo(a.algo)))
    dot = export_dot(g, marks)
    if a.out:
        Path(a.out).write_text(dot)
    else:
        sys.stdout.write(dot)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cmsearch", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("gen", help="write a generated model")
    g.add_argument("name", choices=GENERATORS)
    g.add_argument("--n", type=int, default=0)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--uniform", action="store_true")
    g.add_argument("--zeros", type=float, default=0.0)
    g.add_argument("--kind", choices=("bn", "mrf"), default="bn")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    def common(sp):
        sp.add_argument("--model", required=True)
        sp.add_argument("--ordering")
        sp.add_argument("--task", choices=[t.value for t in Task], default="sum-product")

    s = sub.add_parser("stats", help="pseudo tree statistics")
    common(s)
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("solve", help="run one algorithm")
    common(s)
    s.add_argument("--algo", default="ve",
                   help="ve, ao-df or ao-bf, optionally with ':opt,key=val' options")
    s.add_argument("--cache", choices=("full", "none"), default="full")
    s.add_argument("--lookahead", choices=("none", "fc", "ac"), default="none")
    s.add_argument("--nogood", action="store_true")
    s.add_argument("--gbj", action="store_true")
    s.add_argument("--la-nogoods", action="store_true")
    s.add_argument("--forget-layers", action="store_true")
    s.add_argument("--no-zero-skip", action="store_true")
    s.add_argument("--dump-messages")
    s.add_argument("--dump-trace")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("compare", help="compare the explored sets of two runs")
    common(s)
    s.add_argument("--algo-a", required=True)
    s.add_argument("--algo-b", required=True)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("dot", help="export the context-minimal graph")
    common(s)
    s.add_argument("--algo", help="mark the nodes this run did not explore as dashed")
    s.add_argument("--out")
    s.set_defaults(func=cmd_dot)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ModelFormatError as e:
        print(f"model error: {e}", file=sys.stderr)
        return EXIT_FORMAT
    except SizeGuardError as e:
        print(f"size guard: {e}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
