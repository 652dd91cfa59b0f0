import math

import pytest
from hypothesis import given, settings, strategies as st

from cmsearch.analysis import Comparison, brute_force_value, compare
from cmsearch.aosearch import AoOptions, ao_bf, ao_df, arc_label
from cmsearch.elimination import run_ve
from cmsearch.generators import GenSpec, generate
from cmsearch.model import Domain, Factor, Model, Task, is_strictly_positive, primal_graph
from cmsearch.report import Backbone
from cmsearch.structure import PseudoTree, dfs_pseudo_tree, is_dfs_tree

from helpers import close, random_case


def backbone(g, task=Task.SUM_PRODUCT):
    return Backbone.from_ordering(g.model, g.ordering, task)


def test_fig4_counts_df_and_bf():
    bb = backbone(generate(GenSpec("fig4", uniform=True)))
    for r in (ao_df(bb), ao_bf(bb)):
        assert r.tuples_by_var(5) == [8, 8, 4, 2, 8]
        assert r.value == pytest.approx(1.0)


def test_ex34_node_sets():
    bb = backbone(generate(GenSpec("ex34")), Task.COUNT)
    r = ao_df(bb)
    assert r.value == 1
    assert r.nodes_by_var(4) == [
        {(0,), (1,), (2,), (3,)}, {(1,), (2,), (3,)}, {(2,), (3,)}, {(3,)},
    ]
    assert len(r.explored_nodes) == 10


def test_arc_label_uses_bucket_factors():
    g = generate(GenSpec("fig1"))
    bb = backbone(g)
    m = g.model
    a = {0: 1, 1: 0, 2: 1, 3: 1, 4: 0}
    # D's bucket holds P(D|B,C) only
    assert arc_label(m, bb.tree, 3, a) == m.factors[3].table[0 * 4 + 1 * 2 + 1]
    # A (root) holds P(A)
    assert arc_label(m, bb.tree, 0, a) == m.factors[0].table[1]


def test_option_validation():
    with pytest.raises(ValueError):
        AoOptions(caching="some")
    with pytest.raises(ValueError):
        AoOptions(lookahead="xx")
    with pytest.raises(ValueError):
        AoOptions(lookahead_uses_nogoods=True)
    bb = backbone(generate(GenSpec("ex34")))
    with pytest.raises(ValueError):
        ao_bf(bb, opts=AoOptions(gbj=True))


def test_no_caching_explores_tree():
    bb = backbone(generate(GenSpec("fig4", uniform=True)))
    r = ao_df(bb, opts=AoOptions(caching="none"))
    assert r.cache_hits == 0
    # the OR tree: 2 + 4 + 8 + 16 + 32 AND nodes along the chain D,C,B,A,E
    assert r.arcs == 62
    assert r.value == pytest.approx(1.0)


def test_gbj_strict_on_fig7():
    g = generate(GenSpec("fig7"))
    bb = backbone(g)
    assert not is_dfs_tree(bb.tree, bb.graph)
    plain, jump = ao_df(bb), ao_df(bb, opts=AoOptions(gbj=True))
    assert compare(jump, plain) is Comparison.A_STRICT_SUBSET
    assert jump.value == plain.value


def test_lookahead_nogoods_beat_bf():
    # under Z=0 both X and Y are forced to 0 while X != Y; forward checking
    # only notices after X is assigned, so the no-good on Z is learned deep
    B, Z, X, Y = range(4)
    m = Model(
        "ng",
        tuple(Domain(2) for _ in range(4)),
        (
            Factor((B, Z), (1.0, 2.0, 3.0, 4.0)),
            Factor((Z, X), (1.0, 0.0, 1.0, 1.0)),
            Factor((Z, Y), (1.0, 0.0, 1.0, 1.0)),
            Factor((X, Y), (0.0, 1.0, 1.0, 0.0)),
        ),
    )
    bb = Backbone(m, PseudoTree((None, B, Z, X), B), Task.SUM_PRODUCT)
    df = ao_df(bb, opts=AoOptions(lookahead="fc", lookahead_uses_nogoods=True))
    bf = ao_bf(bb, opts=AoOptions(lookahead="fc"))
    assert df.explored_tuples < bf.explored_tuples
    assert bf.explored_tuples - df.explored_tuples == {(Z, (1, 0))}
    assert df.value == bf.value == pytest.approx(brute_force_value(m))


def test_dfs_tree_runs_without_ordering():
    m, _ = random_case(11, zeros=0.3)
    g = primal_graph(m)
    bb = Backbone(m, dfs_pseudo_tree(g), Task.COUNT)
    assert ao_df(bb).value == brute_force_value(m, Task.COUNT)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), zeros=st.sampled_from([0.0, 0.3, 0.6]),
       task=st.sampled_from(list(Task)))
def test_df_bf_agree_with_brute_force(seed, zeros, task):
    m, d = random_case(seed, zeros=zeros)
    bb = Backbone.from_ordering(m, d, task)
    expect = brute_force_value(m, task)
    df, bf = ao_df(bb), ao_bf(bb)
    assert close(df.value, expect, task) and close(bf.value, expect, task)
    assert compare(df, bf) is Comparison.IDENTICAL
    assert close(ao_df(bb, opts=AoOptions(caching="none")).value, expect, task)
    if is_strictly_positive(m):
        assert compare(run_ve(m, d, task), df) is Comparison.IDENTICAL


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), la=st.sampled_from(["fc", "ac"]),
       task=st.sampled_from(list(Task)))
def test_lookahead_keeps_values_and_df_bf_identity(seed, la, task):
    m, d = random_case(seed, zeros=0.5)
    bb = Backbone.from_ordering(m, d, task)
    expect = brute_force_value(m, task)
    df = ao_df(bb, opts=AoOptions(lookahead=la))
    bf = ao_bf(bb, opts=AoOptions(lookahead=la))
    ng = ao_df(bb, opts=AoOptions(lookahead=la, lookahead_uses_nogoods=True))
    assert compare(df, bf) is Comparison.IDENTICAL
    assert df.explored_tuples <= ao_df(bb).explored_tuples
    assert ng.explored_tuples <= bf.explored_tuples
    for r in (df, bf, ng):
        assert close(r.value, expect, task)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), zeros=st.sampled_from([0.0, 0.5]))
def test_gbj_is_sound(seed, zeros):
    m, d = random_case(seed, zeros=zeros)
    bb = Backbone.from_ordering(m, d, Task.SUM_PRODUCT)
    plain, jump = ao_df(bb), ao_df(bb, opts=AoOptions(gbj=True))
    assert jump.value == plain.value
    assert jump.explored_tuples <= plain.explored_tuples
    t = dfs_pseudo_tree(bb.graph, seed % m.n)
    dbb = Backbone(m, t, Task.SUM_PRODUCT)
    assert ao_df(dbb) == ao_df(dbb, opts=AoOptions(gbj=True))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), caching=st.sampled_from(["full", "none"]))
def test_nogood_flag_is_a_no_op(seed, caching):
    m, d = random_case(seed, zeros=0.4)
    bb = Backbone.from_ordering(m, d, Task.COUNT)
    opts = AoOptions(caching=caching)
    assert ao_df(bb, opts=opts) == ao_df(bb, opts=AoOptions(caching=caching, nogood=True))
    assert ao_bf(bb, opts=opts) == ao_bf(bb, opts=AoOptions(caching=caching, nogood=True))


def test_bn_normalizes_under_search():
    for seed in range(1, 20, 2):
        m, d = random_case(seed)
        bb = Backbone.from_ordering(m, d, Task.SUM_PRODUCT)
        assert math.isclose(ao_df(bb).value, 1.0, rel_tol=1e-9)
        assert math.isclose(ao_bf(bb).value, 1.0, rel_tol=1e-9)
