"""Exact arithmetic on the lattice L of a plumbing graph and its dual L'.

Elements of L' are ``QVector`` instances: exact rational coordinates in the
basis {E_v}.  Most hot loops avoid Fractions by working with one of two
integer encodings:

* dual coordinates ``a_v = -(l', E_v)``, integral exactly on L';
* scaled coordinates ``X = d * coords``, integral on L' as well.
  ``X = adj @ a`` where ``adj = d * (-I)^{-1}``.

Classes in L'/L are tuples of residues in Smith normal form coordinates.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from sympy import Matrix, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import smith_normal_decomp

from .graph import GraphError, PlumbingGraph, delete_end_vertex, validate

ClassId = tuple  # residues modulo the nontrivial invariant factors


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class QVector:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(Fraction(c) for c in self.coords))

    @classmethod
    def zero(cls, n: int) -> "QVector":
        return cls((0,) * n)

    @classmethod
    def basis(cls, n: int, i: int) -> "QVector":
        return cls(tuple(int(j == i) for j in range(n)))

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def _check(self, other):
        if len(other.coords) != len(self.coords):
            raise LatticeError("dimension mismatch")

    def __add__(self, other: "QVector") -> "QVector":
        self._check(other)
        return QVector(tuple(x + y for x, y in zip(self.coords, other.coords)))

    def __sub__(self, other: "QVector") -> "QVector":
        self._check(other)
        return QVector(tuple(x - y for x, y in zip(self.coords, other.coords)))

    def __neg__(self) -> "QVector":
        return QVector(tuple(-x for x in self.coords))

    def __mul__(self, c) -> "QVector":
        return QVector(tuple(c * x for x in self.coords))

    __rmul__ = __mul__

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self.coords)

    def __ge__(self, other: "QVector") -> bool:
        self._check(other)
        return all(x >= y for x, y in zip(self.coords, other.coords))

    def __le__(self, other: "QVector") -> bool:
        return other >= self

    def to_strings(self) -> list[str]:
        return [str(x) for x in self.coords]


@dataclass(frozen=True)
class CharClass:
    """A class of characteristic elements modulo 2L.

    Encoded by the class of ``(k - K)/2`` in L'/L, which is a bijection
    Char/2L -> L'/L.
    """

    label: ClassId


class LatticeContext:
    """Intersection lattice of a negative definite plumbing tree."""

    def __init__(self, graph: PlumbingGraph):
        report = validate(graph)
        if not report:
            raise GraphError("invalid plumbing graph: " + "; ".join(report.reasons))
        self.graph = graph
        self.ids = graph.ids
        self.s = graph.size
        self.I = np.array(graph.intersection_matrix(), dtype=np.int64)
        self.euler = [int(e) for _, e in graph.vertices]
        self.valency = graph.valencies()

        neg = DomainMatrix.from_Matrix(Matrix((-self.I).tolist())).convert_to(ZZ)
        adj, det = neg.adj_det()
        self.d = int(det)
        adj = adj.to_Matrix()
        self.adj = np.array(adj.tolist(), dtype=np.int64)
        self.invI = tuple(
            tuple(Fraction(int(adj[i, j]), self.d) for j in range(self.s)) for i in range(self.s)
        )
        self.dual_basis = [QVector(tuple(self.invI[i][v] for i in range(self.s))) for v in range(self.s)]
        self.K = self.from_dual([2 + e for e in self.euler])
        self._init_snf(neg)
        self._subcontexts: dict = {}

    def _init_snf(self, neg: DomainMatrix):
        D, S, _ = smith_normal_decomp(neg)
        D = D.to_Matrix()
        S = S.to_Matrix()
        diag = [abs(int(D[i, i])) for i in range(self.s)]
        self._snf_rows = [i for i, f in enumerate(diag) if f > 1]
        self.invariant_factors = tuple(diag[i] for i in self._snf_rows)
        self._snf_S = np.array(S.tolist(), dtype=object)
        self._snf_Sinv = np.array(S.inv().tolist(), dtype=object)
        order = 1
        for f in self.invariant_factors:
            order *= f
        if order != self.d:
            raise LatticeError(f"Smith normal form order {order} != det {self.d}")

    def __repr__(self):
        return f"LatticeContext(s={self.s}, d={self.d}, factors={self.invariant_factors})"

    # -- coordinates ---------------------------------------------------------

    def index(self, v) -> int:
        return v if isinstance(v, (int, np.integer)) else self.graph.index(v)

    def from_dual(self, a: Sequence[int]) -> QVector:
        return QVector(tuple(Fraction(int(x), self.d) for x in self.adj @ np.asarray(a, dtype=np.int64)))

    def dual_coords(self, x: QVector) -> tuple[int, ...]:
        """Integer dual coordinates of an element of L'."""
        if len(x) != self.s:
            raise LatticeError("dimension mismatch")
        out = []
        for v in range(self.s):
            a = -sum(self.I[v, w] * x[w] for w in range(self.s))
            if a.denominator != 1:
                raise LatticeError(f"{x} is not in L'")
            out.append(int(a))
        return tuple(out)

    def scaled(self, a: Sequence[int]) -> np.ndarray:
        """Scaled E-coordinates d*l' of the element with dual coordinates a."""
        return self.adj @ np.asarray(a, dtype=np.int64)

    def dual_of_E(self, v) -> np.ndarray:
        """Dual coordinates of E_v: the v-th column of -I."""
        return -self.I[:, self.index(v)]

    # -- pairing -------------------------------------------------------------

    def pairing(self, x: QVector, y: QVector) -> Fraction:
        if len(x) != self.s or len(y) != self.s:
            raise LatticeError("dimension mismatch")
        total = Fraction(0)
        for i in range(self.s):
            if x[i] == 0:
                continue
            row = self.I[i]
            total += x[i] * sum(int(row[j]) * y[j] for j in range(self.s) if row[j])
        return total

    def square(self, x: QVector) -> Fraction:
        return self.pairing(x, x)

    def pairing_dual(self, a, b) -> Fraction:
        """(l1, l2) from dual coordinates: -a^T (-I)^{-1} b."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        return Fraction(-int(a @ self.adj @ b), self.d)

    # -- discriminant group --------------------------------------------------

    def class_of_dual(self, a: Sequence[int]) -> ClassId:
        a = np.asarray([int(x) for x in a], dtype=object)
        y = self._snf_S @ a
        return tuple(int(y[i]) % f for i, f in zip(self._snf_rows, self.invariant_factors))

    def class_of(self, x: QVector) -> ClassId:
        return self.class_of_dual(self.dual_coords(x))

    @property
    def zero_class(self) -> ClassId:
        return (0,) * len(self.invariant_factors)

    def classes(self) -> list[ClassId]:
        """All d classes, zero class first, in lexicographic SNF order."""
        return [tuple(c) for c in itertools.product(*(range(f) for f in self.invariant_factors))]

    def class_rep_dual(self, h: ClassId) -> tuple[int, ...]:
        y = np.zeros(self.s, dtype=object)
        for i, r in zip(self._snf_rows, self._check_class(h)):
            y[i] = r
        a = self._snf_Sinv @ y
        return tuple(int(x) for x in a)

    def _check_class(self, h) -> ClassId:
        h = tuple(int(x) for x in h)
        if len(h) != len(self.invariant_factors):
            raise LatticeError(f"class {h} has wrong length for group {self.invariant_factors}")
        return tuple(x % f for x, f in zip(h, self.invariant_factors))

    def neg_class(self, h: ClassId) -> ClassId:
        return tuple((-x) % f for x, f in zip(self._check_class(h), self.invariant_factors))

    def add_class(self, h: ClassId, g: ClassId) -> ClassId:
        return tuple((x + y) % f for x, y, f in zip(h, g, self.invariant_factors))

    def discriminant_group(self) -> "DiscriminantGroup":
        return DiscriminantGroup(self)

    @cached_property
    def vertex_classes(self) -> list[ClassId]:
        """Classes of the dual basis elements E*_v."""
        return [self.class_of_dual(np.eye(self.s, dtype=np.int64)[v]) for v in range(self.s)]

    def class_order(self, h: ClassId) -> int:
        n, g = 1, h
        while any(g):
            g = self.add_class(g, h)
            n += 1
        return n

    # -- cones, characteristic elements, weights ------------------------------

    def in_lipman_cone(self, x: QVector, strict: bool = False) -> bool:
        a = self.dual_coords(x)
        return all(v > 0 for v in a) if strict else all(v >= 0 for v in a)

    def is_characteristic(self, k: QVector) -> bool:
        try:
            a = self.dual_coords(k)
        except LatticeError:
            return False
        return all((x - e) % 2 == 0 for x, e in zip(a, self.euler))

    def weight_w(self, k: QVector) -> Fraction:
        if not self.is_characteristic(k):
            raise LatticeError(f"{k} is not characteristic")
        return -(self.square(k) + self.s) / 8

    def weight_dual(self, a) -> Fraction:
        """w(k) for a characteristic k given by its dual coordinates."""
        a = np.asarray(a, dtype=np.int64)
        return (Fraction(int(a @ self.adj @ a), self.d) - self.s) / 8

    # -- subgraphs ------------------------------------------------------------

    def subcontext(self, u) -> "LatticeContext":
        """Context of the graph with end-vertex u deleted (cached)."""
        u = self.ids[self.index(u)]
        if u not in self._subcontexts:
            self._subcontexts[u] = LatticeContext(delete_end_vertex(self.graph, u))
        return self._subcontexts[u]

    def restrict_dual(self, u, a: Sequence[int]) -> tuple[int, ...]:
        """R in dual coordinates: drop the u-th coordinate."""
        i = self.index(u)
        if self.valency[i] != 1:
            raise LatticeError(f"{self.ids[i]!r} is not an end-vertex")
        return tuple(int(x) for j, x in enumerate(a) if j != i)

    def restrict_to_subgraph(self, u, x: QVector) -> QVector:
        """The restriction R: L'(G) -> L'(G minus u) for an end-vertex u.

        R is the dual of the inclusion L(G minus u) -> L(G); it kills E*_u and
        sends the other E*_v to their namesakes.  Accepts any rational vector
        (R is extended linearly).
        """
        i = self.index(u)
        if self.valency[i] != 1:
            raise LatticeError(f"{self.ids[i]!r} is not an end-vertex")
        sub = self.subcontext(u)
        # rational dual coordinates, then drop u
        a = [-sum(int(self.I[v, w]) * x[w] for w in range(self.s)) for v in range(self.s)]
        b = [a[v] for v in range(self.s) if v != i]
        coords = [sum(sub.invI[r][c] * b[c] for c in range(sub.s)) for r in range(sub.s)]
        return QVector(tuple(coords))

    # -- representatives ------------------------------------------------------

    @cached_property
    def zone_lower(self) -> tuple[int, ...]:
        return tuple(-e - 1 for e in self.euler)

    def _lower_in_zone(self, a: list[int]) -> list[int]:
        lo = self.zone_lower
        changed = True
        while changed:
            changed = False
            for v in range(self.s):
                step = self.I[:, v]
                while True:
                    b = [x + int(y) for x, y in zip(a, step)]
                    if all(x >= l for x, l in zip(b, lo)):
                        a = b
                        changed = True
                    else:
                        break
        return a

    def zone_representative_dual(self, h: ClassId) -> tuple[int, ...]:
        lo = self.zone_lower
        a = list(self.class_rep_dual(h))
        # d*E*_v lies in L, so each dual coordinate may be moved by multiples of d
        a = [l + (x - l) % self.d for x, l in zip(a, lo)]
        return tuple(self._lower_in_zone(a))

    def zone_representative(self, h: ClassId) -> QVector:
        """An element of class h whose dual coordinates satisfy a_v >= -e_v - 1."""
        return self.from_dual(self.zone_representative_dual(h))

    def zone_representatives_dual(self, h: ClassId, count: int) -> list[tuple[int, ...]]:
        """``count`` distinct zone elements of class h, smallest first."""
        base = self.zone_representative_dual(h)
        lo = self.zone_lower
        seen = {base}
        out = [base]
        frontier = [base]
        while len(out) < count:
            nxt = []
            for a in frontier:
                # steps by E_v when they stay in the zone, and by d*E*_v
                # (which lies in L and only raises a_v) always
                steps = [[-int(y) for y in self.I[:, v]] for v in range(self.s)]
                steps += [[self.d * int(i == v) for i in range(self.s)] for v in range(self.s)]
                for step in steps:
                    b = tuple(int(x) + y for x, y in zip(a, step))
                    if b not in seen and all(x >= l for x, l in zip(b, lo)):
                        seen.add(b)
                        nxt.append(b)
            nxt.sort(key=lambda b: (int(self.scaled(b).sum()), b))
            out.extend(nxt)
            frontier = nxt
        return out[:count]

    def spinc_char_class(self, h: ClassId) -> CharClass:
        """The class [K + 2l'] in Char/2L, l' any representative of -h."""
        return CharClass(self.neg_class(h))

    def char_class_of(self, k: QVector) -> CharClass:
        if not self.is_characteristic(k):
            raise LatticeError(f"{k} is not characteristic")
        a = self.dual_coords(k)
        return CharClass(self.class_of_dual([(x - 2 - e) // 2 for x, e in zip(a, self.euler)]))

    def neg_char_class(self, c: CharClass) -> CharClass:
        """Class of -k: (-k - K)/2 = -l' - K, so the label becomes -h - [K]."""
        kclass = self.class_of_dual([2 + e for e in self.euler])
        return CharClass(self.neg_class(self.add_class(c.label, kclass)))

    def char_rep_dual(self, c: CharClass) -> tuple[int, ...]:
        """Dual coordinates of some characteristic element in class c."""
        a = self.class_rep_dual(c.label)
        return tuple(2 + e + 2 * x for x, e in zip(a, self.euler))


@dataclass
class DiscriminantGroup:
    ctx: LatticeContext

    @property
    def invariant_factors(self) -> tuple[int, ...]:
        return self.ctx.invariant_factors

    @property
    def order(self) -> int:
        return self.ctx.d

    def class_of(self, x: QVector) -> ClassId:
        return self.ctx.class_of(x)

    def enumerate_classes(self) -> list[ClassId]:
        return self.ctx.classes()

    @property
    def zero(self) -> ClassId:
        return self.ctx.zero_class


def build_context(g: PlumbingGraph) -> LatticeContext:
    return LatticeContext(g)

