from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from plumbsw import CharClass, LatticeContext, QVector
from plumbsw.corpus import chain, random_tree, star
from plumbsw.graph import validate
from plumbsw.hilbert import s_invariant
from plumbsw.latcoh import (CubeTables, LatCohError, Rectangle, _rank, certified_rectangle,
                            cube_weight, enlarge, eu_lattice, eu_table, euler_E,
                            random_rectangle, sublevel_betti, sublevel_euler_route,
                            verify_symmetry, weight_polynomial)
from plumbsw.lattice import LatticeError

import oracles

F = Fraction


def test_cube_weight_examples(ctxs):
    g1 = ctxs["G1"]
    E = QVector((1,))
    assert cube_weight(g1, QVector((0,)), []) == F(-1, 8)
    assert cube_weight(g1, -2 * E, ["v0"]) == F(7, 8)
    assert cube_weight(ctxs["G3"], QVector.zero(8), []) == -1
    with pytest.raises(LatticeError):
        cube_weight(g1, g1.dual_basis[0], [])


def test_euler_E_examples(ctxs):
    g1 = ctxs["G1"]
    k = 2 * g1.dual_basis[0]
    assert euler_E(g1, [(k, ())]) == -g1.weight_w(k)
    assert euler_E(g1, []) == 0


def test_euler_E_rectangle_matches_cube_list(ctxs):
    c = ctxs["G5"]
    R = Rectangle(c, (-2, -4), (2, 1))
    cubes = list(R.cubes())
    assert len(cubes) == R.ncells == 3 * 2 + 2 * 2 + 3 * 1 + 2 * 1
    assert euler_E(c, cubes) == euler_E(c, R)


def test_rectangle_from_corners(ctxs):
    c = ctxs["G5"]
    k2 = c.from_dual((-2, -4))
    k1 = k2 + QVector((4, 2))
    R = Rectangle.from_corners(c, k1, k2)
    assert R.widths == (2, 1) and R.k1 == k1 and R.k2 == k2
    assert R.npoints == 6 and all(c.is_characteristic(k) for k in R.points())
    with pytest.raises(LatticeError):
        Rectangle.from_corners(c, k2, k1)
    with pytest.raises(LatticeError):
        Rectangle.from_corners(c, k2 + QVector((2, 0)) + QVector((1, 0)), k2)


def test_weight_polynomial_single_point(ctxs):
    c = ctxs["G1"]
    R = Rectangle(c, (2,), (0,))
    M = weight_polynomial(c, R)
    w = c.weight_dual((2,))
    assert M.terms() == [(w, 1)] and M.at_one() == 1
    assert M.neg_derivative_at_one() == -w == euler_E(c, R)


def test_weight_polynomial_small_rectangle(ctxs):
    c = ctxs["G1"]
    R = Rectangle(c, (-4,), (2,))
    M = weight_polynomial(c, R)
    # 3 vertices minus 2 edges: the Euler characteristic of a segment
    assert M.at_one() == 1
    assert M.neg_derivative_at_one() == euler_E(c, R) == euler_E(c, list(R.cubes()))


def test_sublevel_betti_full_rectangle_is_acyclic(ctxs):
    c = ctxs["G5"]
    R = Rectangle(c, (-2, -4), (2, 2))
    t = R.tables()
    assert sublevel_betti(c, R, t.max_rel - t.min_rel) == [0]


def test_sublevel_betti_two_points():
    c = LatticeContext(chain([-2, -2]))
    R = Rectangle(c, (-2, -2), (1, 1))
    tables = CubeTables.from_vertex_weights(R, [[0, 1], [1, 0]], F(0))
    assert sublevel_betti(c, R, 0, tables) == [1]
    assert sublevel_betti(c, R, 1, tables) == [0]


def test_sublevel_betti_circle():
    c = LatticeContext(chain([-2, -2]))
    R = Rectangle(c, (-2, -2), (2, 2))
    rel = np.zeros((3, 3), dtype=np.int64)
    rel[1, 1] = 1
    tables = CubeTables.from_vertex_weights(R, rel, F(0))
    assert sublevel_betti(c, R, 0, tables) == [0, 1]


def test_sublevel_betti_unique_minimum_g1(ctxs):
    c = ctxs["G1"]
    R = Rectangle(c, (-4,), (2,))  # a = -4, 0, 4: the minimum sits at k = 0
    assert sublevel_betti(c, R, 0) == [0]
    assert R.tables().min_weight == c.weight_dual((0,))
    with pytest.raises(ValueError):
        sublevel_betti(c, R, -1)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 7), st.integers(1, 7), st.integers(0, 10**6))
def test_rank_matches_sympy(rows, cols, seed):
    rng = np.random.default_rng(seed)
    mat = rng.integers(-2, 3, size=(rows, cols)) * (rng.random((rows, cols)) < 0.5)
    sparse = [{j: int(x) for j, x in enumerate(row) if x} for row in mat]
    assert _rank(sparse) == sympy.Matrix(mat.tolist()).rank()


def test_eu_examples(ctxs):
    r = eu_lattice(ctxs["G3"], CharClass(()))
    assert r.eu == 1 and r.d_k == -2
    g1 = ctxs["G1"]
    assert eu_lattice(g1, CharClass((0,))).eu == F(1, 8)
    assert eu_lattice(g1, CharClass((1,))).eu == F(-1, 8)
    assert eu_lattice(ctxs["G2"], CharClass(())).eu == 0


def test_eu_e8_betti_all_zero(ctxs):
    r = eu_lattice(ctxs["G3"], CharClass(()), betti_cell_limit=10**6)
    assert all(b == [0] for b in r.betti.values())


def test_eu_e8_by_weight_scan(ctxs):
    # E8: the lattice is even and unimodular, so Char = 2L and min w = w(0) = -1
    c = ctxs["G3"]
    r = eu_lattice(c, CharClass(()))
    assert r.min_weight == c.weight_w(QVector.zero(8)) == -1


@pytest.mark.parametrize("name", ["G1", "L5", "G4", "C23", "A3"])
def test_eu_is_minus_s_invariant(ctxs, name):
    c = ctxs[name]
    for h in c.classes():
        assert eu_lattice(c, c.spinc_char_class(h)).eu == -s_invariant(c, h)


@pytest.mark.parametrize("name", ["G1", "L5", "G4", "C23"])
def test_symmetry(ctxs, name):
    assert verify_symmetry(ctxs[name])


def test_symmetry_l5_pairs(ctxs):
    c = ctxs["L5"]
    table = eu_table(c)
    assert len(table) == 5
    for h, v in table.items():
        assert table[c.neg_char_class(CharClass(h)).label] == v


@pytest.mark.parametrize("g", [chain([-2, -3, -2]), star(-2, [[-2], [-2], [-2]]), chain([-3, -1, -3])])
def test_certified_rectangle_is_stable(g):
    c = LatticeContext(g)
    for h in c.classes():
        r = eu_lattice(c, CharClass(h), stability_checks=2)
        assert r.rectangle.charclass == CharClass(h)
        big = enlarge(r.rectangle, 3)
        assert big.tables().euler_E() == r.eu


def test_certified_rectangle_class(ctxs):
    c = ctxs["L5"]
    for h in c.classes():
        assert certified_rectangle(c, CharClass(h)).charclass == CharClass(h)


trees = st.builds(lambda seed, s: random_tree(np.random.default_rng(seed), s),
                  st.integers(0, 10**6), st.integers(1, 5)).filter(lambda g: bool(validate(g)))


@settings(max_examples=40, deadline=None)
@given(trees, st.integers(0, 10**6))
def test_rectangle_identities(g, seed):
    c = LatticeContext(g)
    R = random_rectangle(c, np.random.default_rng(seed))
    e = euler_E(c, R)
    assert sublevel_euler_route(c, R) == e
    M = weight_polynomial(c, R)
    assert M.neg_derivative_at_one() == e
    assert M.at_one() == 1
    assert R.tables().eu_from_sublevels() == e
    if R.ncells <= 200:
        assert euler_E(c, list(R.cubes())) == e


@settings(max_examples=30, deadline=None)
@given(trees, st.integers(0, 10**6))
def test_cube_weights_match_fraction_oracle(g, seed):
    c = LatticeContext(g)
    R = random_rectangle(c, np.random.default_rng(seed), max_width=1)
    for k, I in list(R.cubes())[:20]:
        assert cube_weight(c, k, I) == max(
            c.weight_w(k + QVector(tuple(2 * int(c.ids[j] in J) for j in range(c.s))))
            for J in _subsets(I))


def _subsets(items):
    import itertools
    items = list(items)
    return [set(x) for r in range(len(items) + 1) for x in itertools.combinations(items, r)]
