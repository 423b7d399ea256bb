"""Periodic constants and the recursion over end-vertex deletion.

For a one-variable series S = sum c_i t^i whose partial sums along a
period p are eventually polynomial, sum_{i < pn} c_i = P_p(n), the
periodic constant is P_p(0).  The reduced series of a class is the
restriction of Z with t_u = t^d and every other variable set to 1.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

from .graph import blow_up_edge
from .hilbert import pullback_class, s_invariant
from .lattice import ClassId, LatticeContext, LatticeError, QVector
from .series import counting_h_u, one_var_series

DEFAULT_CAP = 8
DEFAULT_WINDOW = 6
MAX_DEGREE = 2


class PeriodicConstantError(RuntimeError):
    """No candidate period gives polynomial partial sums on the available data."""


@dataclass(frozen=True)
class PeriodicConstantResult:
    value: Fraction
    period_used: int
    fit_window: tuple[int, int]  # node range n0..n1 of P_p(n) used for fit + verification
    verified_points: int
    coefficients_used: int = 0


def _interpolate_at_zero(xs: Sequence[int], ys: Sequence[int]) -> Fraction:
    total = Fraction(0)
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        term = Fraction(yi)
        for j, xj in enumerate(xs):
            if j != i:
                term *= Fraction(-xj, xi - xj)
        total += term
    return total


def _evaluate(xs, ys, x) -> Fraction:
    total = Fraction(0)
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        term = Fraction(yi)
        for j, xj in enumerate(xs):
            if j != i:
                term *= Fraction(x - xj, xi - xj)
        total += term
    return total


def fit_period(coeffs: Sequence[int], p: int, window: int = DEFAULT_WINDOW,
               degree: int = MAX_DEGREE, min_node: int = 0) -> PeriodicConstantResult | None:
    """Fit P_p on the last ``window`` available nodes; None if they are not polynomial.

    The first ``degree + 1`` nodes of the window determine the polynomial,
    the rest verify it.  Nodes below ``min_node`` are never used.
    """
    if p <= 0:
        raise ValueError("period must be positive")
    nodes = len(coeffs) // p  # P_p(n) needs c_0 .. c_{pn-1}
    if nodes - window + 1 < min_node or window < degree + 3:
        return None
    prefix = [0]
    for c in coeffs[: nodes * p]:
        prefix.append(prefix[-1] + int(c))
    ns = list(range(nodes - window + 1, nodes + 1))
    vals = [prefix[p * n] for n in ns]
    xs, ys = ns[: degree + 1], vals[: degree + 1]
    for n, v in zip(ns[degree + 1:], vals[degree + 1:]):
        if _evaluate(xs, ys, n) != v:
            return None
    return PeriodicConstantResult(_interpolate_at_zero(xs, ys), p, (ns[0], ns[-1]),
                                  window - degree - 1, nodes * p)


def required_window(p: int, quasi_period: int | None, window: int = DEFAULT_WINDOW,
                    degree: int = MAX_DEGREE) -> int:
    """Nodes needed so that a fit along period p cannot be a coincidence.

    If the partial sums are a quasi-polynomial whose period divides
    ``quasi_period``, then along multiples of p they form r = Q/gcd(Q, p)
    interleaved polynomials; degree + 1 agreements in each residue class
    plus one more node force all of them to coincide.
    """
    if not quasi_period:
        return window
    r = quasi_period // gcd(quasi_period, p)
    return max(window, r * (degree + 1) + 1 + (r > 1))


def periodic_constant(coeffs: Sequence[int], periods: Sequence[int],
                      window: int = DEFAULT_WINDOW, quasi_period: int | None = None,
                      transient: int = 0, degree: int = MAX_DEGREE) -> PeriodicConstantResult:
    """Constant term of the partial-sum polynomial for the smallest fitting period.

    ``quasi_period`` and ``transient`` describe what is known about the
    series: partial sums sum_{i<x} c_i agree with a quasi-polynomial of that
    period for x >= transient.  Without them the fit is a plain tail fit.
    """
    for p in sorted(set(periods)):
        w = required_window(p, quasi_period, window, degree)
        res = fit_period(coeffs, p, w, degree, min_node=-(-transient // p))
        if res is not None:
            return res
    raise PeriodicConstantError(
        f"no period in {sorted(set(periods))} fits {len(coeffs)} coefficients")


def candidate_periods(ctx: LatticeContext, u, cap: int | None = None) -> list[int]:
    """Multiples of d up to cap*d, plus the quasi-period forced by the poles."""
    cap = cap or cap_from_env()
    d = ctx.d
    out = [d * k for k in range(1, cap + 1)]
    natural = reduced_series_shape(ctx, u)[0]
    if natural not in out:
        out.append(natural)
    return sorted(out)


def reduced_series_shape(ctx: LatticeContext, u) -> tuple[int, int]:
    """(quasi-period, transient) of the partial sums of a reduced series at u.

    After class filtering by characters the series is a sum of terms
    prod_v (1 - zeta_v t^{n_v})^{delta_v - 2}, with n_v the scaled
    u-coordinate of E*_v and zeta_v a root of unity of order dividing that
    of [E*_v].  Only end-vertices give poles, so every pole has order
    dividing lcm(n_v * o_v); the numerator has degree at most
    sum over nodes of (delta_v - 2) n_v, after which the partial sums are
    exactly quasi-polynomial.
    """
    i = ctx.index(u)
    period = ctx.d
    transient = 0
    for v in range(ctx.s):
        n_v = int(ctx.adj[i, v])
        if ctx.valency[v] <= 1:
            step = n_v * ctx.class_order(ctx.vertex_classes[v])
            period = period * step // gcd(period, step)
        elif ctx.valency[v] > 2:
            transient += (ctx.valency[v] - 2) * n_v
    return period, transient + 1


def fit_degree(ctx: LatticeContext) -> int:
    """Degree allowed in fits: 2, or one less than the number of end-vertices if larger.

    At t = 1 the reduced series has a pole of order 2, giving quadratic
    partial sums; at other roots of unity the pole order can reach the
    number of end-vertices, and along a full quasi-period those terms add
    polynomials of degree one less.
    """
    ends = sum(1 for dv in ctx.valency if dv <= 1)
    return max(MAX_DEGREE, ends - 1)


def cap_from_env(default: int = DEFAULT_CAP) -> int:
    raw = os.environ.get("PLUMBSW_CAP")
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"PLUMBSW_CAP must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("PLUMBSW_CAP must be positive")
    return value


def _check_end(ctx: LatticeContext, u) -> int:
    i = ctx.index(u)
    if ctx.s < 2 or ctx.valency[i] != 1:
        raise LatticeError(f"{ctx.ids[i]!r} is not an end-vertex of a graph with >= 2 vertices")
    return i


def pc_of_reduced_series(ctx: LatticeContext, h: ClassId, u, cap: int | None = None,
                         window: int = DEFAULT_WINDOW, doublings: int = 6) -> PeriodicConstantResult:
    """Periodic constant of the reduced series of class h at end-vertex u.

    The series is extended by doubling until two consecutive lengths give
    the same fitted constant; ``doublings`` bounds the number of extensions.
    """
    _check_end(ctx, u)
    cache = ctx.__dict__.setdefault("_pc_cache", {})
    key = (tuple(h), ctx.ids[ctx.index(u)], cap, window)
    if key in cache:
        return cache[key]
    periods = candidate_periods(ctx, u, cap)
    quasi, transient = reduced_series_shape(ctx, u)
    degree = fit_degree(ctx)
    N = transient + min(p * (required_window(p, quasi, window, degree) + 1) for p in periods)
    prev = None
    for _ in range(doublings + 1):
        coeffs = one_var_series(ctx, h, u, N - 1)
        try:
            res = periodic_constant(coeffs, periods, window, quasi, transient, degree)
        except PeriodicConstantError:
            res = None
        if res is not None and prev is not None and res.value == prev.value:
            cache[key] = res
            return res
        prev = res
        N *= 2
    raise PeriodicConstantError(
        f"periodic constant of class {tuple(h)} at {u!r} did not stabilize")


def pc_robustness(ctx: LatticeContext, h: ClassId, u, result: PeriodicConstantResult) -> bool:
    """Refit with twice the period on twice the window; the constant must not move."""
    quasi, transient = reduced_series_shape(ctx, u)
    degree = fit_degree(ctx)
    p = 2 * result.period_used
    window = max(2 * (result.fit_window[1] - result.fit_window[0] + 1),
                 required_window(p, quasi, DEFAULT_WINDOW, degree))
    nodes = window - 1 + max(-(-transient // p), 1)
    coeffs = one_var_series(ctx, h, u, p * nodes - 1)
    res = fit_period(coeffs, p, window, degree, min_node=-(-transient // p))
    return res is not None and res.value == result.value


# -- identities ------------------------------------------------------------------


def verify_partial_sum(ctx: LatticeContext, x: QVector, u) -> bool:
    """h^u(l') equals the sum of c_i over i < d * l'_u for the class of l'."""
    i = _check_end(ctx, u)
    a = ctx.dual_coords(x)
    bound = int(ctx.scaled(a)[i])
    lhs = counting_h_u(ctx, x, u)
    if bound <= 0:
        return lhs == 0
    return lhs == sum(one_var_series(ctx, ctx.class_of_dual(a), u, bound - 1))


def _shift_u(ctx: LatticeContext, a, i: int, lo: int) -> tuple[int, ...]:
    """Add a multiple of E_u so that the scaled u-coordinate lies in [lo, lo + d)."""
    X = int(ctx.scaled(a)[i])
    t = -((X - lo) // ctx.d)
    return tuple(int(x) - t * int(y) for x, y in zip(a, ctx.I[:, i]))


def _neighbor(ctx: LatticeContext, u) -> str:
    return ctx.graph.neighbors(ctx.ids[ctx.index(u)])[0]


def surgery_sides(ctx: LatticeContext, h: ClassId, u, cap: int | None = None):
    """Both sides of the surgery identity for class h at end-vertex u.

    Uses lbar of class -h with E_u-coordinate in [0, 1):
      pc(H_{[lbar],u}) = -s_{[-lbar]} - ((K + 2 lbar)^2 + s)/8
                         + s'_{[-R lbar]} + ((K' + 2 R lbar)^2 + s - 1)/8
    where primes refer to the graph with u deleted.
    """
    i = _check_end(ctx, u)
    a = _shift_u(ctx, ctx.class_rep_dual(ctx.neg_class(tuple(h))), i, 0)
    sub = ctx.subcontext(u)
    ra = ctx.restrict_dual(u, a)
    lhs = pc_of_reduced_series(ctx, ctx.class_of_dual(a), u, cap).value
    k = [2 + e + 2 * x for x, e in zip(a, ctx.euler)]
    k_sub = [2 + e + 2 * x for x, e in zip(ra, sub.euler)]
    rhs = (-s_invariant(ctx, tuple(h)) + ctx.weight_dual(k)
           + s_invariant(sub, sub.neg_class(sub.class_of_dual(ra))) - sub.weight_dual(k_sub))
    return lhs, rhs


def verify_surgery_identity(ctx: LatticeContext, h: ClassId, u, cap: int | None = None) -> bool:
    """The surgery identity; blows up the edge at u first when its neighbour is not of valency 2."""
    _check_end(ctx, u)
    uid = ctx.ids[ctx.index(u)]
    w = _neighbor(ctx, uid)
    if ctx.valency[ctx.index(w)] != 2:
        cache = ctx.__dict__.setdefault("_blowup_cache", {})
        if (uid, w) not in cache:
            cache[(uid, w)] = LatticeContext(blow_up_edge(ctx.graph, (uid, w)))
        big = cache[(uid, w)]
        return verify_surgery_identity(big, pullback_class(ctx, big, tuple(h)), uid, cap)
    lhs, rhs = surgery_sides(ctx, h, uid, cap)
    return lhs == rhs


def choose_end_vertex(ctx: LatticeContext) -> str:
    """End-vertex whose deletion leaves the smallest determinant (ties: file order)."""
    ends = [v for v, dv in zip(ctx.ids, ctx.valency) if dv == 1]
    return min(ends, key=lambda v: (ctx.subcontext(v).d, ctx.index(v)))


def sw_via_surgery(ctx: LatticeContext, h: ClassId, cap: int | None = None) -> Fraction:
    """Invariant of class h by deleting end-vertices one at a time.

    With ltilde of class h and E_u-coordinate in (-1, 0]:
      sw_h = -pc(H_{[-ltilde],u}) + sw'_{[R ltilde]}
             + ((-K' + 2 R ltilde)^2 + s - 1)/8 - ((2 ltilde - K)^2 + s)/8.
    """
    h = tuple(h)
    cache = ctx.__dict__.setdefault("_surgery_cache", {})
    if (h, cap) in cache:
        return cache[(h, cap)]
    if ctx.s == 1:
        value = s_invariant(ctx, h)
    else:
        u = choose_end_vertex(ctx)
        i = ctx.index(u)
        a = _shift_u(ctx, ctx.class_rep_dual(h), i, -ctx.d + 1)
        sub = ctx.subcontext(u)
        ra = ctx.restrict_dual(u, a)
        pc = pc_of_reduced_series(ctx, ctx.neg_class(h), u, cap).value
        k = [2 + e - 2 * x for x, e in zip(a, ctx.euler)]  # K - 2 ltilde
        k_sub = [2 + e - 2 * x for x, e in zip(ra, sub.euler)]
        value = (-pc + sw_via_surgery(sub, sub.class_of_dual(ra), cap)
                 - sub.weight_dual(k_sub) + ctx.weight_dual(k))
    cache[(h, cap)] = value
    return value


def verify_additivity(ctx: LatticeContext, x: QVector, u, max_doublings: int = 8) -> bool:
    """h(l') = h^u(l') + h'(R l') once a_u is large enough.

    Needs the neighbour of u to have valency 2.  a_u is raised by multiples of
    d (adding d*E*_u keeps the class and R l'); the identity must hold at two
    consecutive doublings.
    """
    from .series import counting_h

    i = _check_end(ctx, u)
    if ctx.valency[ctx.index(_neighbor(ctx, u))] != 2:
        raise LatticeError("additivity needs the neighbour of u to have valency 2")
    sub = ctx.subcontext(u)
    a = list(ctx.dual_coords(x))
    rx = sub.from_dual(ctx.restrict_dual(u, a))
    h_sub = counting_h(sub, rx)
    held = False
    t = 1
    for _ in range(max_doublings):
        b = list(a)
        b[i] += t * ctx.d
        y = ctx.from_dual(b)
        ok = counting_h(ctx, y) == counting_h_u(ctx, y, u) + h_sub
        if ok and held:
            return True
        held = ok
        t *= 2
    return False
