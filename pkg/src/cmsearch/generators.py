"""Model generators for the worked examples plus seeded random models.

Random fills use ``random.Random(seed)``; table entries are drawn as
``1 - random()`` so they lie in (0, 1].
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass

from .model import Domain, Factor, Model, render_model


def _uniform(rng: random.Random) -> float:
    return 1.0 - rng.random()


GENERATORS = ("fig1", "fig4", "ex33", "ex34", "ex43", "fig7", "random")


@dataclass(frozen=True)
class GenSpec:
    name: str
    n: int = 0
    k: int = 2
    seed: int = 1
    uniform: bool = False
    zeros: float = 0.0  # random only: chance that a table entry is zero
    kind: str = "bn"  # random only: "bn" (normalized CPTs) or "mrf"

    def __post_init__(self):
        if self.name not in GENERATORS:
            raise ValueError(f"unknown generator {self.name!r}")
        if self.name == "ex33" and (self.n <= 0 or self.n % 3):
            raise ValueError("ex33 needs n divisible by 3")
        if self.name == "ex43" and self.n < 3:
            raise ValueError("ex43 needs n >= 3")
        if self.name == "random":
            if self.n < 1 or self.k < 1:
                raise ValueError("random needs n >= 1 and k >= 1")
            if not 0.0 <= self.zeros < 1.0:
                raise ValueError("zeros must lie in [0, 1)")
            if self.kind not in ("bn", "mrf"):
                raise ValueError("kind must be 'bn' or 'mrf'")


@dataclass(frozen=True)
class Generated:
    model: Model
    ordering: tuple[int, ...]

    def text(self) -> str:
        names = ",".join(self.model.var_name(v) for v in self.ordering)
        return f"# ordering {names}\n" + render_model(self.model)


def _cpt(rng: random.Random | None, n_rows: int, k: int, zeros: float = 0.0) -> list[float]:
    table = []
    for _ in range(n_rows):
        if rng is None:
            row = [1.0 / k] * k
        else:
            row = [_uniform(rng) for _ in range(k)]
            if zeros:
                keep = rng.randrange(k)
                row = [0.0 if (i != keep and _uniform(rng) <= zeros) else r for i, r in enumerate(row)]
            s = sum(row)
            row = [r / s for r in row]
        table.extend(row)
    return table


def _bn(name: str, names: list[str], k: int, families: list[tuple[int, ...]], rng: random.Random | None) -> Model:
    """A Bayesian network; each family lists the parents first and the child last."""
    domains = tuple(Domain(k) for _ in names)
    factors = tuple(
        Factor(fam, tuple(_cpt(rng, k ** (len(fam) - 1), k))) for fam in families
    )
    return Model(name, domains, factors, (), tuple(names))


def fig1(spec: GenSpec) -> Generated:
    # A=0 B=1 C=2 D=3 E=4: P(A) P(B|A) P(C|A) P(D|B,C) P(E|A,B)
    rng = None if spec.uniform else random.Random(spec.seed)
    fams = [(0,), (0, 1), (0, 2), (1, 2, 3), (0, 1, 4)]
    m = _bn("fig1", list("ABCDE"), 2, fams, rng)
    return Generated(m, (0, 1, 4, 2, 3))


def fig4(spec: GenSpec) -> Generated:
    rng = None if spec.uniform else random.Random(spec.seed)
    fams = [(0,), (0, 1), (0, 2), (1, 2, 3), (0, 1, 4)]
    m = _bn("fig4", list("ABCDE"), 2, fams, rng)
    return Generated(m, (3, 2, 1, 0, 4))


def ex33(spec: GenSpec) -> Generated:
    n = spec.n
    rng = random.Random(spec.seed)
    third = n // 3
    a = list(range(third))
    b = list(range(third, 2 * third))
    c = list(range(2 * third, n))
    pairs = set(itertools.combinations(a + b, 2)) | set(itertools.combinations(a + c, 2))
    factors = tuple(
        Factor(p, tuple(_uniform(rng) for _ in range(4))) for p in sorted(pairs)
    )
    names = tuple(f"X{i + 1}" for i in range(n))
    m = Model(f"ex33_n{n}", tuple(Domain(2) for _ in range(n)), factors, (), names)
    return Generated(m, tuple(range(n)))


def ex34(spec: GenSpec) -> Generated:
    labels = ("1", "2", "3", "4")
    less = tuple(1.0 if i < j else 0.0 for i in range(4) for j in range(4))
    factors = (Factor((0, 1), less), Factor((1, 2), less), Factor((2, 3), less))
    m = Model("ex34", tuple(Domain(4, labels) for _ in range(4)), factors, (), tuple("ABCD"))
    return Generated(m, (0, 1, 2, 3))


def ex43(spec: GenSpec) -> Generated:
    """Pairwise not-equal on integers with equal stars; the last variable forces stars.

    The last variable's compatibility is one relation over all ``n``
    variables that admits only the all-star tuple.  Binary constraints to
    each variable would let forward checking refute every integer at the
    first level, which is not the situation the example describes.
    """
    n = spec.n
    star = n - 2  # value index of '*' on the first n-1 variables
    labels = tuple(str(i) for i in range(1, n - 1)) + ("*",)
    domains = [Domain(n - 1, labels) for _ in range(n - 1)] + [Domain(1, ("*",))]
    pair = tuple(
        1.0 if (i == star and j == star) or (i != star and j != star and i != j) else 0.0
        for i in range(n - 1)
        for j in range(n - 1)
    )
    factors = [Factor((i, j), pair) for i, j in itertools.combinations(range(n - 1), 2)]
    # row-major with the last scope variable fastest: all-star is the final entry
    gate = [0.0] * (n - 1) ** (n - 1)
    gate[-1] = 1.0
    factors.append(Factor(tuple(range(n)), tuple(gate)))
    names = tuple(f"X{i + 1}" for i in range(n))
    m = Model(f"ex43_n{n}", tuple(domains), tuple(factors), (), names)
    return Generated(m, tuple(range(n)))


def fig7(spec: GenSpec) -> Generated:
    """Eight variables whose bucket tree hangs a dead-end variable under a non-neighbour.

    Under the recommended ordering (8,1,3,5,4,2,7,6) variable 3 becomes a
    child of 1 although its only graph ancestor is 8; when 8 takes its first
    value every value of 3 is inconsistent.
    """
    names = [str(i) for i in range(1, 9)]
    idx = {nm: i for i, nm in enumerate(names)}
    rng = random.Random(spec.seed)

    def positive(*vs: str) -> Factor:
        scope = tuple(idx[v] for v in vs)
        return Factor(scope, tuple(_uniform(rng) for _ in range(2 ** len(scope))))

    gate = Factor((idx["8"], idx["3"]), (0.0, 0.0, 1.0, 1.0))
    factors = (
        positive("8", "1"),
        gate,
        positive("1", "5"),
        positive("3", "5"),
        positive("1", "4"),
        positive("4", "2"),
        positive("2", "7"),
        positive("7", "6"),
    )
    m = Model("fig7", tuple(Domain(2) for _ in names), factors, (), tuple(names))
    order = tuple(idx[v] for v in ("8", "1", "3", "5", "4", "2", "7", "6"))
    return Generated(m, order)


def random_model(spec: GenSpec) -> Generated:
    """Seeded random model over ``n`` variables with domain size ``k``.

    ``bn`` draws up to two earlier parents per variable and normalizes each
    CPT row (a zeroed row keeps one nonzero entry); ``mrf`` draws pairwise
    and occasional ternary factors with unnormalized entries.
    """
    n, k = spec.n, spec.k
    rng = random.Random(spec.seed)
    names = tuple(f"X{i + 1}" for i in range(n))
    domains = tuple(Domain(k) for _ in range(n))
    factors = []
    if spec.kind == "bn":
        for i in range(n):
            cands = list(range(i))
            rng.shuffle(cands)
            parents = sorted(cands[: min(len(cands), rng.randrange(3))])
            fam = tuple(parents) + (i,)
            factors.append(Factor(fam, tuple(_cpt(rng, k ** len(parents), k, spec.zeros))))
    else:
        for i in range(1, n):
            j = rng.randrange(i)
            scope = [j, i]
            if i >= 2 and rng.randrange(3) == 0:
                extra = rng.randrange(i)
                if extra != j:
                    scope = sorted([j, extra]) + [i]
            size = k ** len(scope)
            table = [0.0 if (spec.zeros and _uniform(rng) <= spec.zeros) else _uniform(rng)
                     for _ in range(size)]
            factors.append(Factor(tuple(scope), tuple(table)))
        if n == 1:
            factors.append(Factor((0,), tuple(_uniform(rng) for _ in range(k))))
    m = Model(f"random_n{n}_k{k}_s{spec.seed}", domains, tuple(factors), (), names)
    return Generated(m, tuple(range(n)))


def generate(spec: GenSpec) -> Generated:
    return {
        "fig1": fig1,
        "fig4": fig4,
        "ex33": ex33,
        "ex34": ex34,
        "ex43": ex43,
        "fig7": fig7,
        "random": random_model,
    }[spec.name](spec)


def random_ordering(n: int, seed: int) -> tuple[int, ...]:
    order = list(range(n))
    random.Random(f"ordering-{seed}").shuffle(order)
    return tuple(order)


def is_bayesian_network(m: Model) -> bool:
    """Every factor's rows over its last variable sum to one."""
    for f in m.factors:
        k = m.domains[f.scope[-1]].size
        for i in range(0, len(f.table), k):
            if not math.isclose(sum(f.table[i : i + k]), 1.0, rel_tol=1e-12):
                return False
    return True
