"""Shared model factories for the test suite."""

from __future__ import annotations

import math

from cmsearch.generators import GenSpec, generate, random_ordering
from cmsearch.model import Task


def random_case(seed: int, *, zeros: float = 0.0, max_n: int = 10, max_k: int = 3):
    """A seeded random model plus a random ordering (n <= max_n, k <= max_k)."""
    kind = "bn" if seed % 2 else "mrf"
    n = 2 + seed % (max_n - 1)
    k = 2 + (seed // 7) % (max_k - 1)
    g = generate(GenSpec("random", n=n, k=k, seed=seed, zeros=zeros, kind=kind))
    return g.model, random_ordering(n, seed)


def bundled():
    """Every generator example at a size the oracles handle quickly."""
    specs = [
        GenSpec("fig1"), GenSpec("fig1", uniform=True), GenSpec("fig4"),
        GenSpec("fig4", uniform=True), GenSpec("ex34"), GenSpec("ex33", n=6),
        GenSpec("ex33", n=9), GenSpec("ex43", n=5), GenSpec("ex43", n=6), GenSpec("fig7"),
    ]
    return [(s, generate(s)) for s in specs]


def close(a: float, b: float, task: Task) -> bool:
    if task is not Task.SUM_PRODUCT:
        return a == b
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-300)
