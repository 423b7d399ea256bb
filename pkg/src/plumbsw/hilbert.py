"""The s-invariant from counting functions, and the per-class invariant table.

For a zone element l' (dual coordinates a_v >= -e_v - 1) the quantity

    -h(l') - ((K + 2l')^2 + s) / 8

depends only on the class of l'; it is the invariant of the class [-l'].
Since ((K + 2l')^2 + s) / 8 = -w(K + 2l'), everything reduces to counting_h
and the weight function.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .graph import PlumbingGraph, blow_up_edge, blow_up_vertex
from .lattice import ClassId, LatticeContext
from .series import counting_h


def frac_str(x: Fraction) -> str:
    return str(Fraction(x))


def graph_hash(g: PlumbingGraph) -> str:
    return hashlib.sha256(g.to_text().encode()).hexdigest()[:16]


def expression_value(ctx: LatticeContext, a: Sequence[int]) -> Fraction:
    """-h(l') - ((K+2l')^2 + s)/8 for l' with dual coordinates a."""
    k = [2 + e + 2 * int(x) for x, e in zip(a, ctx.euler)]
    return -counting_h(ctx, ctx.from_dual(a)) + ctx.weight_dual(k)


def s_invariant(ctx: LatticeContext, h: ClassId) -> Fraction:
    """Invariant of class h, evaluated at the zone representative of -h."""
    cache = ctx.__dict__.setdefault("_s_cache", {})
    h = tuple(h)
    if h not in cache:
        cache[h] = expression_value(ctx, ctx.zone_representative_dual(ctx.neg_class(h)))
    return cache[h]


def hilbert_expression_check(ctx: LatticeContext, h: ClassId, count: int = 3) -> bool:
    """The expression takes one value on ``count`` distinct zone elements of class -h."""
    if count < 2:
        raise ValueError("count must be at least 2")
    reps = ctx.zone_representatives_dual(ctx.neg_class(tuple(h)), count)
    if len(reps) < count:
        return False
    values = {expression_value(ctx, a) for a in reps}
    return len(values) == 1


@dataclass
class SwTable:
    """Class label -> invariant of the spin^c structure h * sigma_can."""

    values: dict
    method: str = "series"
    graph: str = ""
    order: list = field(default_factory=list)

    def __getitem__(self, h) -> Fraction:
        return self.values[tuple(h)]

    def __len__(self):
        return len(self.values)

    def __eq__(self, other) -> bool:
        return isinstance(other, SwTable) and self.values == other.values

    def items(self):
        for h in self.order or sorted(self.values):
            yield h, self.values[h]

    def to_json_obj(self) -> list[dict]:
        return [{"class": list(h), "sw": frac_str(v)} for h, v in self.items()]

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)


def table_from(ctx: LatticeContext, fn: Callable[[LatticeContext, ClassId], Fraction],
               method: str) -> SwTable:
    classes = ctx.classes()
    return SwTable({h: fn(ctx, h) for h in classes}, method, graph_hash(ctx.graph), classes)


def sw_all(ctx: LatticeContext) -> SwTable:
    return table_from(ctx, s_invariant, "series")


# -- blow-up invariance ------------------------------------------------------------


def pullback_class(ctx: LatticeContext, big: LatticeContext, h: ClassId) -> ClassId:
    """Class of pi^* l' on the blown-up graph.

    pi^* preserves pairings and is orthogonal to the exceptional vertex, so
    its dual coordinates are those of l' on the old vertices and 0 on the
    new one.
    """
    a = dict(zip(ctx.ids, ctx.class_rep_dual(h)))
    return big.class_of_dual([a.get(v, 0) for v in big.ids])


def blow_up_invariance(g: PlumbingGraph, where, fn=s_invariant) -> bool:
    """Invariants agree before and after a blow-up, classes matched by pullback.

    ``where`` is a vertex id (vertex blow-up) or a pair of ids (edge blow-up).
    """
    ctx = LatticeContext(g)
    g2 = blow_up_edge(g, tuple(where)) if isinstance(where, (tuple, list)) else blow_up_vertex(g, where)
    big = LatticeContext(g2)
    if big.d != ctx.d:
        return False
    images = {pullback_class(ctx, big, h): h for h in ctx.classes()}
    if len(images) != ctx.d:
        return False
    return all(fn(ctx, h) == fn(big, h2) for h2, h in images.items())
