"""Coefficients of the zeta series Z(t) = prod_v (1 - t^{E*_v})^(delta_v - 2).

In the variables x_v = t^{E*_v} the series is a product of one-variable
factors, so the coefficient at l' = sum_v c_v E*_v is a product of binomials
in the dual coordinates c_v.  Everything in this module is exact integer
arithmetic; exponents are keyed by dual coordinates.
"""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterator, Sequence

import numpy as np

from .lattice import ClassId, LatticeContext, LatticeError, QVector


def factor_coeff(m: int, c: int) -> int:
    """Coefficient of x^c in (1 - x)^m."""
    if c < 0:
        return 0
    if m < 0:
        return comb(c - m - 1, c)
    if c > m:
        return 0
    return (-1) ** c * comb(m, c)


def exponents(ctx: LatticeContext) -> list[int]:
    return [dv - 2 for dv in ctx.valency]


def coeff_dual(ctx: LatticeContext, a: Sequence[int]) -> int:
    out = 1
    for m, c in zip(exponents(ctx), a):
        out *= factor_coeff(m, int(c))
        if out == 0:
            break
    return out


def coeff_p(ctx: LatticeContext, x: QVector) -> int:
    """Taylor coefficient p_{l'} of Z(t); zero off L' and off the cone."""
    try:
        a = ctx.dual_coords(x)
    except LatticeError:
        return 0
    return coeff_dual(ctx, a)


# -- bounded enumeration ------------------------------------------------------


class _ClassTables:
    """L'/L as integer indices, with the translation by each [E*_v] as an index array."""

    def __init__(self, ctx: LatticeContext):
        self.classes = ctx.classes()
        self.pos = {c: j for j, c in enumerate(self.classes)}
        self.shift = []
        self.order = []
        self.first_hit = []  # first_hit[v][j]: least c >= 0 with j + c*[E*_v] = 0, or -1
        for v in range(ctx.s):
            g = ctx.vertex_classes[v]
            self.shift.append(np.array([self.pos[ctx.add_class(c, g)] for c in self.classes]))
            n = ctx.class_order(g)
            self.order.append(n)
            hit = np.full(len(self.classes), -1, dtype=np.int64)
            cur = self.pos[ctx.zero_class]
            neg = np.array([self.pos[ctx.neg_class(c)] for c in self.classes])
            for c in range(n):
                # cur = -c*[E*_v]; from that class c steps reach 0
                hit[cur] = c
                cur = int(neg[self.shift[v][neg[cur]]])
            self.first_hit.append(hit)
        self.neg = np.array([self.pos[ctx.neg_class(c)] for c in self.classes])
        self.add = np.array([[self.pos[ctx.add_class(a, b)] for b in self.classes]
                             for a in self.classes])

    @classmethod
    def of(cls, ctx: LatticeContext) -> "_ClassTables":
        if "_class_tables" not in ctx.__dict__:
            ctx.__dict__["_class_tables"] = cls(ctx)
        return ctx.__dict__["_class_tables"]


class _Enumerator:
    """Enumerate cone points b = sum c_v E*_v with p_b != 0 in a down-closed region.

    The region is ``exists v in bounds: X_v(b) < bounds[v]`` with X the
    scaled coordinates.  Points are grouped by all coordinates except the
    last unbounded one, whose admissible values form a prefix range.
    Classes are integer indices into ``_ClassTables``.
    """

    def __init__(self, ctx: LatticeContext, bounds: dict[int, int], target: ClassId | None):
        self.ctx = ctx
        self.tables = _ClassTables.of(ctx)
        self.bounds = list(bounds.items())
        self.bv = np.array([v for v, _ in self.bounds], dtype=np.int64)
        self.bb = np.array([b for _, b in self.bounds], dtype=np.int64)
        self.target = None if target is None else self.tables.pos[tuple(target)]
        self.m = exponents(ctx)
        self.cols = [[int(x) for x in ctx.adj[:, v]] for v in range(ctx.s)]
        self.nodes = [v for v in range(ctx.s) if self.m[v] > 0]
        self.free = [v for v in range(ctx.s) if self.m[v] < 0]
        self.zero = self.tables.pos[ctx.zero_class]

    def inside(self, X) -> bool:
        return any(X[v] < b for v, b in self.bounds)

    def room(self, X, f) -> int:
        """Number of c >= 0 with X + c*col_f inside the region."""
        col = self.cols[f]
        best = 0
        for v, b in self.bounds:
            gap = b - X[v]
            if gap > 0:
                best = max(best, -(-gap // col[v]))
        return best

    def _node_starts(self):
        s = self.ctx.s
        for node_c in itertools.product(*(range(self.m[v] + 1) for v in self.nodes)):
            X = [0] * s
            weight = 1
            cls = self.zero
            c = [0] * s
            for v, cv in zip(self.nodes, node_c):
                if cv:
                    col = self.cols[v]
                    X = [x + cv * y for x, y in zip(X, col)]
                    weight *= factor_coeff(self.m[v], cv)
                    for _ in range(cv):
                        cls = int(self.tables.shift[v][cls])
                    c[v] = cv
            if self.inside(X):
                yield X, weight, cls, c

    def groups(self) -> Iterator[tuple[list[int], int, int, list[int], int, int]]:
        """Yield (X_prefix, weight, class_prefix, c_prefix, f_last, room)."""
        for X, weight, cls, c in self._node_starts():
            if not self.free:
                yield X, weight, cls, c, -1, 0
                continue
            yield from self._dfs(0, X, weight, cls, c)

    def _dfs(self, j, X, weight, cls, c):
        f = self.free[j]
        if j == len(self.free) - 1:
            yield X, weight, cls, c, f, self.room(X, f)
            return
        col = self.cols[f]
        shift = self.tables.shift[f]
        cf = 0
        while self.inside(X):
            c2 = list(c)
            c2[f] = cf
            yield from self._dfs(j + 1, X, weight * factor_coeff(self.m[f], cf), cls, c2)
            X = [x + y for x, y in zip(X, col)]
            cls = int(shift[cls])
            cf += 1

    def progression(self, cls: int, f: int) -> tuple[int, int] | None:
        """(c0, stride) such that cls + c*[E*_f] hits the target iff c = c0 mod stride."""
        if self.target is None:
            return 0, 1
        t = self.tables
        # cls + c*g = target  <=>  (cls - target) + c*g = 0
        c0 = int(t.first_hit[f][t.add[cls, t.neg[self.target]]])
        if c0 < 0:
            return None
        return c0, t.order[f]

    def total(self) -> int:
        if self.free and all(self.m[f] == -1 for f in self.free):
            return self._total_batched()
        out = 0
        for X, weight, cls, c, f, room in self.groups():
            if f < 0:
                if self.target is None or cls == self.target:
                    out += weight
                continue
            prog = self.progression(cls, f)
            if prog is None:
                continue
            out += weight * _progression_sum(self.m[f], prog[0], prog[1], room)
        return out

    def _rooms(self, X: np.ndarray, f: int) -> np.ndarray:
        """room() for a batch of points, X restricted to the bounded coordinates."""
        col = np.asarray(self.cols[f], dtype=np.int64)[self.bv]
        gaps = self.bb[None, :] - X
        need = np.where(gaps > 0, -(-gaps // col[None, :]), 0)
        return need.max(axis=1)

    def _total_batched(self, chunk: int = 1 << 20) -> int:
        """total() when every free vertex is an end (factor (1 - x)^{-1}).

        Then each admissible point has the coefficient of its node part, so
        the free coordinates are expanded breadth-first as numpy arrays and
        the last one is counted by an arithmetic progression.
        """
        t = self.tables
        starts = list(self._node_starts())
        if not starts:
            return 0
        X = np.array([[x[v] for v in self.bv] for x, _, _, _ in starts], dtype=np.int64)
        W = np.array([w for _, w, _, _ in starts], dtype=np.int64)
        C = np.array([c for _, _, c, _ in starts], dtype=np.int64)
        orbits = []
        for f in self.free:
            orbit = [np.arange(len(t.classes))]
            for _ in range(t.order[f] - 1):
                orbit.append(t.shift[f][orbit[-1]])
            orbits.append(np.stack(orbit))
        last = self.free[-1]
        if self.target is not None:
            hit = t.first_hit[last][t.add[:, t.neg[self.target]]]

        def count(X, W, C, j):
            f = self.free[j]
            room = self._rooms(X, f)
            if j < len(self.free) - 1 and room.sum() > chunk and len(X) > 1:
                half = len(X) // 2
                return count(X[:half], W[:half], C[:half], j) + count(X[half:], W[half:], C[half:], j)
            if j == len(self.free) - 1:
                if self.target is None:
                    return int((W * room).sum())
                c0 = hit[C]
                n = np.where((c0 >= 0) & (room > c0), (room - 1 - c0) // t.order[f] + 1, 0)
                return int((W * n).sum())
            rep = np.repeat(np.arange(len(X)), room)
            offsets = np.arange(len(rep)) - np.repeat(np.cumsum(room) - room, room)
            col = np.asarray(self.cols[f], dtype=np.int64)[self.bv]
            X2 = X[rep] + offsets[:, None] * col[None, :]
            C2 = orbits[j][offsets % t.order[f], C[rep]]
            return count(X2, W[rep], C2, j + 1)

        return count(X, W, C, 0)

    def terms(self) -> Iterator[tuple[list[int], list[int], int]]:
        """Yield (c, X, coefficient) for every point of the region in the target class."""
        for X, weight, cls, c, f, room in self.groups():
            if f < 0:
                if self.target is None or cls == self.target:
                    yield c, X, weight
                continue
            prog = self.progression(cls, f)
            if prog is None:
                continue
            col = self.cols[f]
            for cf in range(prog[0], room, prog[1]):
                coef = weight * factor_coeff(self.m[f], cf)
                c2 = list(c)
                c2[f] = cf
                yield c2, [x + cf * y for x, y in zip(X, col)], coef


def _progression_sum(m: int, c0: int, stride: int, room: int) -> int:
    """Sum of coeff(x^c in (1-x)^m) over c = c0, c0+stride, ... < room."""
    if room <= c0:
        return 0
    n = (room - 1 - c0) // stride + 1
    if m == -1:
        return n
    if m == -2:
        return n * (c0 + 1) + stride * n * (n - 1) // 2
    return sum(factor_coeff(m, c) for c in range(c0, room, stride))


def _scaled_point(ctx: LatticeContext, x: QVector) -> tuple[tuple[int, ...], list[int]]:
    a = ctx.dual_coords(x)
    return a, [int(v) for v in ctx.scaled(a)]


# -- public operations ---------------------------------------------------------


@dataclass
class CoeffTable:
    """Sparse Taylor coefficients of Z keyed by dual coordinates."""

    ctx: LatticeContext
    bound: tuple[int, ...]
    coeffs: dict = field(default_factory=dict)

    def __getitem__(self, x: QVector) -> int:
        return self.coeffs.get(self.ctx.dual_coords(x), 0)

    def __len__(self):
        return len(self.coeffs)

    def items(self):
        for a, p in self.coeffs.items():
            yield self.ctx.from_dual(a), p

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(list(self.ctx.ids) + ["coefficient"])
        for a in sorted(self.coeffs):
            writer.writerow(list(a) + [self.coeffs[a]])
        return buf.getvalue()


def enumerate_support(ctx: LatticeContext, bound) -> Iterator[tuple[QVector, int]]:
    """Every l' = sum c_v E*_v with 0 <= c_v <= bound_v and p_{l'} != 0."""
    if isinstance(bound, int):
        bound = [bound] * ctx.s
    m = exponents(ctx)
    ranges = []
    for v in range(ctx.s):
        top = bound[v] if m[v] < 0 else min(bound[v], m[v])
        ranges.append(range(top + 1))
    for c in itertools.product(*ranges):
        p = coeff_dual(ctx, c)
        if p:
            yield ctx.from_dual(c), p


def coeff_table(ctx: LatticeContext, bound) -> CoeffTable:
    if isinstance(bound, int):
        bound = [bound] * ctx.s
    table = CoeffTable(ctx, tuple(bound))
    for x, p in enumerate_support(ctx, bound):
        table.coeffs[ctx.dual_coords(x)] = p
    return table


def counting_h(ctx: LatticeContext, x: QVector) -> int:
    """Sum of p_{l'+l} over l in L with l not >= 0."""
    a, X = _scaled_point(ctx, x)
    bounds = {v: X[v] for v in range(ctx.s)}
    return _Enumerator(ctx, bounds, ctx.class_of_dual(a)).total()


def counting_h_u(ctx: LatticeContext, x: QVector, u) -> int:
    """Same sum restricted to shifts l with negative E_u-coefficient."""
    i = ctx.index(u)
    if ctx.s < 2 or ctx.valency[i] != 1:
        raise LatticeError(f"{ctx.ids[i]!r} is not an end-vertex")
    a, X = _scaled_point(ctx, x)
    return _Enumerator(ctx, {i: X[i]}, ctx.class_of_dual(a)).total()


def one_var_series(ctx: LatticeContext, h: ClassId, u, N: int) -> list[int]:
    """Coefficients c_0..c_N of Z restricted to class h, with t_u = t^d and t_v = 1 otherwise.

    The exponent of a term t^{l''} becomes d * l''_u, the scaled u-coordinate.
    Computed as a product of one-variable factors graded by L'/L: each
    factor (1 - x_v) shifts the exponent by the u-coordinate of d*E*_v and
    the class by [E*_v].
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    i = ctx.index(u)
    classes = ctx.classes()
    pos = {c: j for j, c in enumerate(classes)}
    m = exponents(ctx)
    ends = [v for v in range(ctx.s) if m[v] < 0]
    bound = 1
    for v in ends:
        bound *= (N // int(ctx.adj[i, v]) + 1) ** (-m[v])
    for v in range(ctx.s):
        if m[v] > 0:
            bound *= 2 ** m[v]
    dtype = np.int64 if bound < 2 ** 62 else object
    A = np.zeros((len(classes), N + 1), dtype=dtype)
    A[pos[ctx.zero_class], 0] = 1
    for v in range(ctx.s):
        if m[v] == 0:
            continue
        n = int(ctx.adj[i, v])
        g = ctx.vertex_classes[v]
        # row j of A[src] holds the row of the class that shifts to class j
        src = np.array([pos[ctx.add_class(c, ctx.neg_class(g))] for c in classes])
        for _ in range(abs(m[v])):
            if n > N:
                continue
            if m[v] > 0:
                A[:, n:] -= A[src, : N + 1 - n]
            else:
                for lo in range(n, N + 1, n):
                    hi = min(lo + n, N + 1)
                    A[:, lo:hi] += A[src, lo - n:hi - n]
    return [int(x) for x in A[pos[tuple(h)]]]


def one_var_series_enumerated(ctx: LatticeContext, h: ClassId, u, N: int) -> list[int]:
    """Same coefficients by enumerating the cone points directly (slow; for cross-checks)."""
    i = ctx.index(u)
    out = [0] * (N + 1)
    for _, X, coef in _Enumerator(ctx, {i: N + 1}, tuple(h)).terms():
        out[X[i]] += coef
    return out


# -- weighted cube expansion ----------------------------------------------------


def characteristic_region(ctx: LatticeContext, top: int = 4) -> np.ndarray:
    """Dual coordinates of characteristic k with e_v <= a_v <= top.

    The lower end sits one parity step below the support of the series,
    so the region also exercises vanishing coefficients.
    """
    axes = [np.arange(e, top + 1, 2) for e in ctx.euler]
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1).astype(np.int64)


def verify_cube_expansion(ctx: LatticeContext, region=None) -> bool:
    """Check sum_I (-1)^{|I|+1} w((k,I)) == p_{(k-K)/2} for each k in region."""
    from .latcoh import signed_cube_sums

    if region is None:
        region = characteristic_region(ctx)
    region = np.asarray(
        [ctx.dual_coords(k) if isinstance(k, QVector) else k for k in region], dtype=np.int64
    ).reshape(-1, ctx.s)
    euler = np.asarray(ctx.euler, dtype=np.int64)
    if np.any((region - euler) % 2):
        raise LatticeError("region contains non-characteristic elements")
    lhs = signed_cube_sums(ctx, region)
    for a, value in zip(region, lhs):
        c = (a - 2 - euler) // 2
        expected = coeff_dual(ctx, c) if np.all(c >= 0) else 0
        if value != expected:
            return False
    return True


def convolution_check(ctx: LatticeContext, bound: int) -> bool:
    """Truncated Z times prod_v (1 - x_v)^(2 - delta_v) equals 1."""
    table = coeff_table(ctx, bound)
    inverse_m = [-m for m in exponents(ctx)]
    ranges = [range(min(bound, im) + 1) if im >= 0 else range(bound + 1) for im in inverse_m]
    inv = {}
    for c in itertools.product(*ranges):
        q = 1
        for m, cv in zip(inverse_m, c):
            q *= factor_coeff(m, cv)
        if q:
            inv[c] = q
    product: dict = {}
    for a, p in table.coeffs.items():
        for b, q in inv.items():
            key = tuple(x + y for x, y in zip(a, b))
            if max(key) <= bound:
                product[key] = product.get(key, 0) + p * q
    return all(v == (1 if not any(k) else 0) for k, v in product.items()) and product.get(
        (0,) * ctx.s
    ) == 1

