import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plumbsw import CharClass, LatticeContext
from plumbsw.corpus import G1, G4, G5, chain, random_tree
from plumbsw.graph import blow_up_edge, blow_up_vertex, validate
from plumbsw.hilbert import (SwTable, blow_up_invariance, expression_value, graph_hash,
                             hilbert_expression_check, pullback_class, s_invariant, sw_all)
from plumbsw.latcoh import eu_lattice

F = Fraction


def test_s_invariant_fixtures(ctxs):
    assert s_invariant(ctxs["G2"], ()) == 0
    assert s_invariant(ctxs["G1"], (0,)) == F(-1, 8)
    assert s_invariant(ctxs["G1"], (1,)) == F(1, 8)
    assert s_invariant(ctxs["G3"], ()) == -1


@pytest.mark.parametrize("name", ["G1", "G2", "G3"])
def test_fixture_values_agree_with_lattice_route(ctxs, name):
    c = ctxs[name]
    for h in c.classes():
        assert s_invariant(c, h) == -eu_lattice(c, c.spinc_char_class(h)).eu


def test_sw_all_tables(ctxs):
    assert sw_all(ctxs["G2"]).values == {(): 0}
    assert sw_all(ctxs["G1"]).values == {(0,): F(-1, 8), (1,): F(1, 8)}
    assert sw_all(ctxs["G3"]).values == {(): -1}


def test_sw_table_json(ctxs):
    t = sw_all(ctxs["G1"])
    assert t.to_json() == json.dumps(
        [{"class": [0], "sw": "-1/8"}, {"class": [1], "sw": "1/8"}], sort_keys=True)
    assert t.graph == graph_hash(ctxs["G1"].graph) and len(t) == 2 and t[(1,)] == F(1, 8)
    assert t == sw_all(LatticeContext(G1))


def test_lens_space_pins_sign_convention(ctxs):
    # e = -5: h and -h are different classes, and the invariant tells them apart
    c = ctxs["L5"]
    table = sw_all(c)
    assert [table[h] for h in c.classes()] == [F(1, 10), F(1, 2), F(1, 10), F(-1, 10), F(-1, 10)]
    for h in c.classes():
        assert table[h] == -eu_lattice(c, c.spinc_char_class(h)).eu
    # the same expression at a representative of +h gives the table of -h instead
    for h in c.classes():
        assert expression_value(c, c.zone_representative_dual(h)) == table[c.neg_class(h)]
    assert table[(1,)] != table[(4,)]


def test_lens_space_symmetry_pairs(ctxs):
    c = ctxs["L5"]
    table = sw_all(c)
    kclass = c.class_of_dual([2 + e for e in c.euler])
    for h in c.classes():
        assert table[h] == table[c.add_class(kclass, c.neg_class(h))]


def test_expression_check_examples(ctxs):
    g1 = ctxs["G1"]
    assert g1.zone_representatives_dual((0,), 3) == [(2,), (4,), (6,)]
    assert hilbert_expression_check(g1, (0,), 3)
    assert all(hilbert_expression_check(ctxs["G5"], h, 3) for h in ctxs["G5"].classes())
    assert all(hilbert_expression_check(ctxs["G4"], h, 2) for h in ctxs["G4"].classes())
    with pytest.raises(ValueError):
        hilbert_expression_check(g1, (0,), 1)


def test_expression_values_by_hand_g1(ctxs):
    # h(l') for l' = nE: sum over even m < 2n of (m + 1); then subtract ((K+2l')^2 + 1)/8
    c = ctxs["G1"]
    for n in (1, 2, 3):
        hcount = sum(m + 1 for m in range(0, 2 * n, 2))
        value = -hcount - F((2 * n) ** 2 * -2 + 1, 8)
        assert value == F(-1, 8)
        assert expression_value(c, (2 * n,)) == value


def test_pullback_class_examples():
    ctx = LatticeContext(G5)
    big = LatticeContext(blow_up_edge(G5, ("v0", "v1")))
    images = {pullback_class(ctx, big, h) for h in ctx.classes()}
    assert len(images) == 3 and big.d == 3


@pytest.mark.parametrize("g", [G1, G5, G4, chain([-5]), chain([-2, -3])])
def test_blow_up_invariance(g):
    assert blow_up_invariance(g, g.ids[0])
    if g.edges:
        assert blow_up_invariance(g, g.edges[0])


def test_blow_up_invariance_detects_non_invariant():
    # K^2 drops by one under every blow-up
    assert not blow_up_invariance(chain([-5]), "v0", fn=lambda ctx, h: ctx.square(ctx.K))


trees = st.builds(lambda seed, s: random_tree(np.random.default_rng(seed), s),
                  st.integers(0, 10**6), st.integers(1, 5)).filter(
                      lambda g: bool(validate(g)) and LatticeContext(g).d <= 40)


@settings(max_examples=20, deadline=None)
@given(trees)
def test_expression_check_property(g):
    c = LatticeContext(g)
    assert all(hilbert_expression_check(c, h, 3) for h in c.classes())


@settings(max_examples=15, deadline=None)
@given(trees, st.data())
def test_blow_up_invariance_property(g, data):
    v = data.draw(st.sampled_from(g.ids))
    assert blow_up_invariance(g, v)
    if g.edges:
        assert blow_up_invariance(g, data.draw(st.sampled_from(list(g.edges))))
