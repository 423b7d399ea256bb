"""Weighted cubes, rectangles and the Euler characteristic of lattice cohomology.

A rectangle of characteristic elements is stored as its lowest corner k2
(dual coordinates) plus integer widths N: its points are k2 + 2n with
0 <= n <= N.  Inside a rectangle all weights differ from w(k2) by integers,

    w(k2 + 2n) = w(k2) + (sum_v n_v a_v(k2) - n^T I n) / 2,

so cube weights are handled as int64 numpy arrays relative to w(k2).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .lattice import CharClass, LatticeContext, LatticeError, QVector


class LatCohError(RuntimeError):
    """Non-convergence or internal disagreement in the lattice cohomology route."""


# -- single cubes ------------------------------------------------------------------


def _subsets(items):
    items = list(items)
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)


def cube_weight(ctx: LatticeContext, k: QVector, I: Iterable) -> Fraction:
    """Max of w over the vertices k + 2*sum_{j in I'} E_j, I' a subset of I."""
    I = [ctx.index(v) for v in I]
    if not ctx.is_characteristic(k):
        raise LatticeError(f"{k} is not characteristic")
    best = None
    for sub in _subsets(I):
        shift = QVector(tuple(2 * int(j in sub) for j in range(ctx.s)))
        w = ctx.weight_w(k + shift)
        if best is None or w > best:
            best = w
    return best


def euler_E(ctx: LatticeContext, cubes) -> Fraction:
    """Alternating weighted count sum (-1)^{|I|+1} w((k, I)).

    ``cubes`` is a Rectangle or an iterable of (k, I) pairs.
    """
    if isinstance(cubes, Rectangle):
        return cubes.tables().euler_E()
    total = Fraction(0)
    for k, I in cubes:
        total += (-1) ** (len(tuple(I)) + 1) * cube_weight(ctx, k, I)
    return total


def _subset_masks(s: int) -> np.ndarray:
    return ((np.arange(1 << s)[:, None] >> np.arange(s)) & 1).astype(np.int64)


def signed_cube_sums(ctx: LatticeContext, a: np.ndarray) -> np.ndarray:
    """sum_{I subset V} (-1)^{|I|+1} w((k, I)) for a batch of characteristic k.

    ``a`` holds dual coordinates, one row per k.  Uses
    2(w(k + 2E_J) - w(k)) = sum_{v in J} a_v - E_J^2 and a subset-max
    transform; the w(k) term cancels because sum_I (-1)^{|I|} = 0.
    """
    a = np.asarray(a, dtype=np.int64).reshape(-1, ctx.s)
    s = ctx.s
    masks = _subset_masks(s)
    ej2 = np.einsum("mi,ij,mj->m", masks, ctx.I, masks)
    signs = np.where(masks.sum(axis=1) % 2 == 0, -1, 1).astype(np.int64)
    out = np.empty(len(a), dtype=np.int64)
    chunk = max(1, 2_000_000 // (1 << s))
    for start in range(0, len(a), chunk):
        block = a[start:start + chunk]
        F = block @ masks.T - ej2  # twice the weight increments
        F = F.reshape((len(block),) + (2,) * s)
        for axis in range(s):
            # bit `axis` of the mask is the (s - axis)-th array axis in C order
            ax = s - axis
            lo = np.take(F, [0], axis=ax)
            hi = np.take(F, [1], axis=ax)
            F = np.concatenate([lo, np.maximum(lo, hi)], axis=ax)
        F = F.reshape(len(block), 1 << s)
        twice = F @ signs
        if np.any(twice % 2):
            raise LatCohError("odd signed cube sum")
        out[start:start + chunk] = twice // 2
    return out


# -- rectangles --------------------------------------------------------------------


@dataclass(frozen=True)
class Rectangle:
    """Characteristic elements k2 + 2n, 0 <= n <= widths, of one class mod 2L."""

    ctx: LatticeContext = field(repr=False, compare=False)
    base: tuple  # dual coordinates of the lowest corner k2
    widths: tuple

    @classmethod
    def from_corners(cls, ctx: LatticeContext, k1: QVector, k2: QVector) -> "Rectangle":
        if not (ctx.is_characteristic(k1) and ctx.is_characteristic(k2)):
            raise LatticeError("rectangle corners must be characteristic")
        diff = k1 - k2
        if not diff.is_integral() or any(x % 2 for x in diff.coords):
            raise LatticeError("k1 - k2 must lie in 2L")
        if any(x < 0 for x in diff.coords):
            raise LatticeError("need k1 >= k2")
        return cls(ctx, ctx.dual_coords(k2), tuple(int(x) // 2 for x in diff.coords))

    @property
    def charclass(self) -> CharClass:
        return CharClass(self.ctx.class_of_dual(
            [(x - 2 - e) // 2 for x, e in zip(self.base, self.ctx.euler)]))

    @property
    def k2(self) -> QVector:
        return self.ctx.from_dual(self.base)

    @property
    def k1(self) -> QVector:
        return self.k2 + QVector(tuple(2 * n for n in self.widths))

    @property
    def top_dual(self) -> tuple:
        n = np.asarray(self.widths, dtype=np.int64)
        return tuple(int(x) for x in np.asarray(self.base) - 2 * self.ctx.I @ n)

    @property
    def npoints(self) -> int:
        return int(np.prod([n + 1 for n in self.widths]))

    @property
    def ncells(self) -> int:
        return int(np.prod([2 * n + 1 for n in self.widths]))

    def points(self) -> Iterable[QVector]:
        k2 = self.k2
        for n in itertools.product(*(range(w + 1) for w in self.widths)):
            yield k2 + QVector(tuple(2 * x for x in n))

    def cubes(self) -> Iterable[tuple[QVector, tuple]]:
        """All (k, I) with every vertex in the rectangle."""
        k2 = self.k2
        ids = self.ctx.ids
        for n in itertools.product(*(range(w + 1) for w in self.widths)):
            free = [v for v in range(self.ctx.s) if n[v] < self.widths[v]]
            k = k2 + QVector(tuple(2 * x for x in n))
            for I in _subsets(free):
                yield k, tuple(ids[v] for v in I)

    def tables(self) -> "CubeTables":
        return CubeTables.build(self)


@dataclass
class CubeTables:
    """Relative weights of every cube of a rectangle, one array per subset I."""

    rect: Rectangle
    w0: Fraction  # weight of the lowest corner
    arrays: dict  # mask -> int64 array of w((k, I)) - w0, indexed by n

    @classmethod
    def build(cls, rect: Rectangle) -> "CubeTables":
        ctx = rect.ctx
        s = ctx.s
        N = rect.widths
        a0 = np.asarray(rect.base, dtype=np.int64)
        n = np.indices([w + 1 for w in N], dtype=np.int64)
        lin = np.tensordot(a0, n, axes=1)
        quad = np.einsum("i...,ij,j...->...", n, ctx.I, n)
        base = lin - quad
        if np.any(base % 2):
            raise LatCohError("non-integral relative weight")
        return cls.from_vertex_weights(rect, base // 2, rect.ctx.weight_dual(a0))

    @classmethod
    def from_vertex_weights(cls, rect: Rectangle, rel: np.ndarray, w0: Fraction) -> "CubeTables":
        """Cube weights as maxima over vertices, for arbitrary integer vertex weights w0 + rel."""
        s = rect.ctx.s
        N = rect.widths
        rel = np.asarray(rel, dtype=np.int64)
        if rel.shape != tuple(w + 1 for w in N):
            raise ValueError("vertex weights do not match the rectangle")
        arrays = {0: rel}
        for mask in range(1, 1 << s):
            v = (mask & -mask).bit_length() - 1
            prev = arrays.get(mask ^ (1 << v))
            if prev is None or N[v] == 0:
                continue
            m = prev.shape[v]
            lo = np.take(prev, range(0, m - 1), axis=v)
            hi = np.take(prev, range(1, m), axis=v)
            arrays[mask] = np.maximum(lo, hi)
        return cls(rect, Fraction(w0), arrays)

    def signed(self):
        for mask, arr in self.arrays.items():
            yield (-1) ** bin(mask).count("1"), mask, arr

    @property
    def min_rel(self) -> int:
        return int(self.arrays[0].min())

    @property
    def max_rel(self) -> int:
        return int(self.arrays[0].max())

    @property
    def min_weight(self) -> Fraction:
        return self.w0 + self.min_rel

    def euler_E(self) -> Fraction:
        # sum_I (-1)^{|I|} #cubes = 1 for a rectangle, so the w0 part is -w0
        total = 0
        count = 0
        for sign, _, arr in self.signed():
            total += sign * int(arr.sum())
            count += sign * arr.size
        return -(self.w0 * count) - total

    def weight_polynomial(self) -> "WeightPolynomial":
        coeffs: dict = {}
        for sign, _, arr in self.signed():
            vals, counts = np.unique(arr, return_counts=True)
            for v, c in zip(vals.tolist(), counts.tolist()):
                coeffs[v] = coeffs.get(v, 0) + sign * c
        return WeightPolynomial(self.w0, {k: v for k, v in coeffs.items() if v})

    def sublevel_chi(self) -> list[int]:
        """chi(S_n) for n = 0 .. max - min (after which S_n is the whole rectangle)."""
        lo, hi = self.min_rel, self.max_rel
        chi = np.zeros(hi - lo + 1, dtype=np.int64)
        for sign, _, arr in self.signed():
            hist = np.bincount((arr - lo).ravel(), minlength=hi - lo + 1)
            chi += sign * hist[: hi - lo + 1]
        return np.cumsum(chi).tolist()

    def eu_from_sublevels(self) -> Fraction:
        chi = self.sublevel_chi()
        return -self.min_weight + sum(c - 1 for c in chi)


@dataclass
class WeightPolynomial:
    """M(t) = sum over cubes (-1)^{|I|} t^{w(cube)}; exponents are w0 + integer keys."""

    shift: Fraction
    coeffs: dict

    def terms(self) -> list[tuple[Fraction, int]]:
        return sorted((self.shift + k, c) for k, c in self.coeffs.items())

    def at_one(self) -> int:
        return sum(self.coeffs.values())

    def neg_derivative_at_one(self) -> Fraction:
        return -sum((self.shift + k) * c for k, c in self.coeffs.items())


def weight_polynomial(ctx: LatticeContext, R: Rectangle) -> WeightPolynomial:
    return R.tables().weight_polynomial()


# -- sublevel complexes and their homology ----------------------------------------

def _rank(rows: list[dict]) -> int:
    """Rank over Q of a sparse integer matrix given as {column: entry} rows."""
    pivots: dict = {}
    rank = 0
    for row in rows:
        row = {k: Fraction(v) for k, v in row.items() if v}
        while row:
            col = min(row)
            if col not in pivots:
                lead = row[col]
                pivots[col] = {k: v / lead for k, v in row.items()}
                rank += 1
                break
            prow = pivots[col]
            f = row[col]
            for k, v in prow.items():
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
    return rank


def sublevel_cells(tables: CubeTables, n: int) -> dict[int, list]:
    """Cubes of S_n grouped by dimension, as (position tuple, mask) pairs."""
    threshold = tables.min_rel + n
    cells: dict[int, list] = {}
    for mask, arr in tables.arrays.items():
        q = bin(mask).count("1")
        for pos in zip(*np.nonzero(arr <= threshold)):
            cells.setdefault(q, []).append((tuple(int(x) for x in pos), mask))
    return cells


def sublevel_betti(ctx: LatticeContext, R: Rectangle, n: int, tables: CubeTables | None = None) -> list[int]:
    """Reduced Betti numbers (over Q) of S_n, the cubes of R of weight <= n + min(w|R)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    tables = tables or R.tables()
    cells = sublevel_cells(tables, n)
    top = max(cells) if cells else -1
    index = {q: {c: i for i, c in enumerate(cells.get(q, []))} for q in range(top + 1)}
    ranks = {}
    for q in range(1, top + 1):
        rows = []
        for pos, mask in cells[q]:
            row: dict = {}
            bits = [v for v in range(ctx.s) if mask >> v & 1]
            for j, v in enumerate(bits):
                face = mask ^ (1 << v)
                sign = -1 if j % 2 else 1
                up = list(pos)
                up[v] += 1
                for p2, sgn in ((tuple(up), sign), (pos, -sign)):
                    idx = index[q - 1][(p2, face)]
                    row[idx] = row.get(idx, 0) + sgn
            rows.append(row)
        ranks[q] = _rank(rows)
    betti = []
    for q in range(top + 1):
        b = len(cells.get(q, [])) - ranks.get(q, 0) - ranks.get(q + 1, 0)
        betti.append(b - 1 if q == 0 else b)
    while len(betti) > 1 and betti[-1] == 0:
        betti.pop()
    return betti


def sublevel_euler_route(ctx: LatticeContext, R: Rectangle) -> Fraction:
    """-min(w|R) + sum_n reduced Euler characteristic of S_n, from Betti numbers."""
    tables = R.tables()
    total = -tables.min_weight
    for n in range(tables.max_rel - tables.min_rel + 1):
        betti = sublevel_betti(ctx, R, n, tables)
        total += sum((-1) ** q * b for q, b in enumerate(betti))
    return total


# -- certified rectangles and eu -----------------------------------------------------


def _shrink(ctx: LatticeContext, base: np.ndarray, widths: np.ndarray):
    """Push faces of the rectangle inward while the push cannot change cohomology.

    The top face in direction v may be pushed down by 2E_v when
    w(k - 2E_v) <= w(k) on the whole face; a_v is smallest at the top corner,
    so the test is a_v(top) >= -e_v.  Symmetrically the bottom face moves up
    when a_v(bottom) <= e_v.  Each push is a weight-non-increasing
    deformation retraction of every sublevel set.
    """
    I = ctx.I
    euler = ctx.euler
    base = base.copy()
    widths = widths.copy()
    moved = True
    while moved:
        moved = False
        for v in range(ctx.s):
            ev = -euler[v]
            if widths[v] == 0:
                continue
            top = base - 2 * I @ widths
            if top[v] >= ev:
                steps = min(int(widths[v]), (int(top[v]) - ev) // (2 * ev) + 1)
                widths[v] -= steps
                moved = True
            if widths[v] == 0:
                continue
            if base[v] <= -ev:
                steps = min(int(widths[v]), (-ev - int(base[v])) // (2 * ev) + 1)
                base = base - 2 * steps * I[:, v]
                widths[v] -= steps
                moved = True
    return base, widths


def certified_rectangle(ctx: LatticeContext, c: CharClass) -> Rectangle:
    """A small rectangle of class c whose lattice cohomology is that of the graph.

    Start from corners k1 with (k1, E_v) <= e_v and k2 with (k2, E_v) >= -e_v;
    any larger rectangle retracts onto R(k1, k2) face by face, and R(k1, k2)
    itself is then shrunk by the same moves.
    """
    top = np.asarray([2 + e for e in ctx.euler]) + 2 * np.asarray(
        ctx.zone_representative_dual(c.label), dtype=np.int64)
    neg = ctx.neg_char_class(c)
    bot = -(np.asarray([2 + e for e in ctx.euler]) + 2 * np.asarray(
        ctx.zone_representative_dual(neg.label), dtype=np.int64))
    diff = ctx.scaled(top - bot)  # d * (k1 - k2)
    D = ctx.adj.sum(axis=1)  # d * E-coords of sum_v d E*_v, which lies in L and S'
    t = 0
    while np.any(diff + 2 * t * ctx.d * D < 0):
        t += 1
    bot = bot - 2 * t * ctx.d * np.ones(ctx.s, dtype=np.int64)
    diff = diff + 2 * t * ctx.d * D
    if np.any(diff % (2 * ctx.d)):
        raise LatCohError("corners are not congruent modulo 2L")
    widths = diff // (2 * ctx.d)
    base, widths = _shrink(ctx, bot, widths)
    return Rectangle(ctx, tuple(int(x) for x in base), tuple(int(x) for x in widths))


@dataclass
class EuResult:
    charclass: CharClass
    eu: Fraction
    min_weight: Fraction
    rectangle: Rectangle
    betti: dict | None = None  # n -> reduced Betti numbers, when computed

    @property
    def d_k(self) -> Fraction:
        return 2 * self.min_weight


def enlarge(R: Rectangle, steps: int) -> Rectangle:
    """Move the lowest corner down by steps * 2 * sum_v E_v."""
    ctx = R.ctx
    base = np.asarray(R.base, dtype=np.int64) + 2 * steps * (ctx.I @ np.ones(ctx.s, dtype=np.int64))
    return Rectangle(ctx, tuple(int(x) for x in base), tuple(w + steps for w in R.widths))


def eu_lattice(ctx: LatticeContext, c: CharClass, stability_checks: int = 0,
               betti_cell_limit: int = 0) -> EuResult:
    """Normalized Euler characteristic of the lattice cohomology of class c.

    Computed twice on a certified rectangle: as the weighted cube count
    E(R), and as -min w + sum_n chi~(S_n).  ``stability_checks`` further
    rectangles, each enlarged downward, must reproduce both E(R) and min w.
    With ``betti_cell_limit`` > 0, reduced Betti numbers of the sublevel
    sets are attached when the rectangle has at most that many cells.
    """
    R = certified_rectangle(ctx, c)
    tables = R.tables()
    e_value = tables.euler_E()
    b_value = tables.eu_from_sublevels()
    if e_value != b_value:
        raise LatCohError(f"E(R) = {e_value} but sublevel route gives {b_value}")
    for step in range(1, stability_checks + 1):
        t2 = enlarge(R, step).tables()
        if t2.euler_E() != e_value or t2.min_weight != tables.min_weight:
            raise LatCohError(f"rectangle not stable after {step} enlargement(s)")
    betti = None
    if betti_cell_limit and R.ncells <= betti_cell_limit:
        betti = {n: sublevel_betti(ctx, R, n, tables)
                 for n in range(tables.max_rel - tables.min_rel + 1)}
    return EuResult(c, e_value, tables.min_weight, R, betti)


def eu_table(ctx: LatticeContext, **kwargs) -> dict:
    """eu for every class of Char/2L, keyed by the label of the class."""
    return {h: eu_lattice(ctx, CharClass(h), **kwargs).eu for h in ctx.classes()}


def verify_symmetry(ctx: LatticeContext) -> bool:
    values = eu_table(ctx)
    return all(values[h] == values[ctx.neg_char_class(CharClass(h)).label] for h in values)


def random_rectangle(ctx: LatticeContext, rng: np.random.Generator, max_width: int = 2,
                     spread: int = 3) -> Rectangle:
    """A small rectangle with a random corner near the origin and random widths."""
    a = np.asarray([e + 2 * int(rng.integers(-spread, spread + 1)) for e in ctx.euler], dtype=np.int64)
    widths = tuple(int(rng.integers(0, max_width + 1)) for _ in range(ctx.s))
    return Rectangle(ctx, tuple(int(x) for x in a), widths)
