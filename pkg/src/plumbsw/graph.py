"""Plumbing graphs: parsing, validation and the blow-up calculus.

A plumbing graph here is a tree whose vertices carry integer Euler numbers
(all genera are zero).  Graphs are immutable; every transform returns a new
graph and keeps the ids of the vertices it did not remove.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable


class GraphError(ValueError):
    """Raised for malformed graph input or an invalid transform."""


class ParseError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class PlumbingGraph:
    vertices: tuple[tuple[str, int], ...]
    edges: tuple[tuple[str, str], ...] = ()
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {v: i for i, (v, _) in enumerate(self.vertices)})

    @classmethod
    def build(cls, vertices: Iterable[tuple[str, int]], edges: Iterable[tuple[str, str]] = ()):
        vertices = tuple((str(v), int(e)) for v, e in vertices)
        edges = tuple(sorted(_normalize_edge(a, b) for a, b in edges))
        return cls(vertices, edges)

    @property
    def ids(self) -> list[str]:
        return [v for v, _ in self.vertices]

    @property
    def size(self) -> int:
        return len(self.vertices)

    def index(self, v: str) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise GraphError(f"unknown vertex {v!r}") from None

    def __contains__(self, v) -> bool:
        return v in self._index

    def euler(self, v: str) -> int:
        return self.vertices[self.index(v)][1]

    def neighbors(self, v: str) -> list[str]:
        self.index(v)
        out = []
        for a, b in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return out

    def valency(self, v: str) -> int:
        return len(self.neighbors(v))

    def valencies(self) -> list[int]:
        deg = [0] * self.size
        for a, b in self.edges:
            deg[self.index(a)] += 1
            deg[self.index(b)] += 1
        return deg

    def end_vertices(self) -> list[str]:
        return [v for v, dv in zip(self.ids, self.valencies()) if dv == 1]

    def has_edge(self, v: str, w: str) -> bool:
        return _normalize_edge(v, w) in self.edges

    def intersection_matrix(self) -> list[list[int]]:
        n = self.size
        mat = [[0] * n for _ in range(n)]
        for i, (_, e) in enumerate(self.vertices):
            mat[i][i] = e
        for a, b in self.edges:
            i, j = self.index(a), self.index(b)
            mat[i][j] = mat[j][i] = 1
        return mat

    def fresh_id(self, stem: str) -> str:
        """Deterministic new id derived from ``stem``."""
        candidate = f"{stem}'"
        k = 1
        while candidate in self:
            k += 1
            candidate = f"{stem}'{k}"
        return candidate

    def to_dict(self) -> dict:
        return {
            "vertices": [{"id": v, "e": e} for v, e in self.vertices],
            "edges": [list(edge) for edge in self.edges],
        }

    def to_text(self) -> str:
        lines = [f"vertex {v} {e}" for v, e in self.vertices]
        lines += [f"edge {a} {b}" for a, b in self.edges]
        return "\n".join(lines) + "\n"


def _normalize_edge(a, b) -> tuple[str, str]:
    a, b = str(a), str(b)
    return (a, b) if a <= b else (b, a)


def _check_edges(vertices, edges, line_of=None):
    known = {v for v, _ in vertices}
    seen = set()
    for i, (a, b) in enumerate(edges):
        line = line_of[i] if line_of else None
        for x in (a, b):
            if x not in known:
                raise ParseError(f"edge references unknown id {x!r}", line)
        if a == b:
            raise ParseError(f"self-loop at {a!r}", line)
        key = _normalize_edge(a, b)
        if key in seen:
            raise ParseError(f"multiple edge {a!r}-{b!r}", line)
        seen.add(key)


def parse_graph(text: str) -> PlumbingGraph:
    """Parse the line-oriented graph format.

    Lines are ``vertex <id> <integer>``, ``edge <id> <id>`` or ``# comment``;
    blank lines are ignored.  Vertices keep their file order.
    """
    vertices: list[tuple[str, int]] = []
    edges: list[tuple[str, str]] = []
    edge_lines: list[int] = []
    ids: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind = tokens[0]
        if kind == "vertex":
            if len(tokens) != 3:
                raise ParseError("expected 'vertex <id> <integer>'", lineno)
            vid = tokens[1]
            try:
                e = int(tokens[2])
            except ValueError:
                raise ParseError(f"Euler number {tokens[2]!r} is not an integer", lineno) from None
            if vid in ids:
                raise ParseError(f"duplicate vertex id {vid!r}", lineno)
            ids.add(vid)
            vertices.append((vid, e))
        elif kind == "edge":
            if len(tokens) != 3:
                raise ParseError("expected 'edge <id> <id>'", lineno)
            edges.append((tokens[1], tokens[2]))
            edge_lines.append(lineno)
        else:
            raise ParseError(f"unknown directive {kind!r}", lineno)
    _check_edges(vertices, edges, edge_lines)
    return PlumbingGraph.build(vertices, edges)


def parse_graph_json(text: str) -> PlumbingGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    try:
        vertices = [(str(v["id"]), v["e"]) for v in data["vertices"]]
        edges = [tuple(edge) for edge in data.get("edges", [])]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed graph JSON: {exc}") from None
    if any(not isinstance(e, int) or isinstance(e, bool) for _, e in vertices):
        raise ParseError("Euler numbers must be integers")
    if len({v for v, _ in vertices}) != len(vertices):
        raise ParseError("duplicate vertex id")
    if any(len(edge) != 2 for edge in edges):
        raise ParseError("edges must be pairs of ids")
    _check_edges(vertices, edges)
    return PlumbingGraph.build(vertices, edges)


def load_graph(path) -> PlumbingGraph:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        return parse_graph_json(text)
    return parse_graph(text)


@dataclass
class ValidationReport:
    ok: bool
    reasons: list[str]

    def __bool__(self) -> bool:
        return self.ok


def leading_principal_minors(mat: list[list[int]]) -> list[int]:
    """Leading principal minors of an integer matrix (fraction-free Bareiss).

    The elimination stops at the first vanishing pivot; later minors are
    reported as None in that case.
    """
    n = len(mat)
    a = [list(row) for row in mat]
    minors: list = []
    prev = 1
    for k in range(n):
        pivot = a[k][k]
        minors.append(pivot)
        if pivot == 0:
            minors.extend([None] * (n - k - 1))
            break
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev
        prev = pivot
    return minors


def _is_tree(g: PlumbingGraph) -> tuple[bool, bool]:
    """(connected, acyclic)."""
    n = g.size
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    acyclic = True
    for a, b in g.edges:
        ra, rb = find(g.index(a)), find(g.index(b))
        if ra == rb:
            acyclic = False
        else:
            parent[ra] = rb
    connected = len({find(i) for i in range(n)}) <= 1
    return connected, acyclic


def validate(g: PlumbingGraph) -> ValidationReport:
    reasons = []
    if g.size == 0:
        return ValidationReport(False, ["graph has no vertices"])
    connected, acyclic = _is_tree(g)
    if not connected:
        reasons.append("graph is not connected")
    if not acyclic:
        reasons.append("graph contains a cycle")
    neg = [[-x for x in row] for row in g.intersection_matrix()]
    minors = leading_principal_minors(neg)
    for k, m in enumerate(minors, start=1):
        if m is None or m <= 0:
            reasons.append(
                f"not negative definite: leading minor {k} of -I is {0 if m is None else m}"
            )
            break
    return ValidationReport(not reasons, reasons)


def _replace(g: PlumbingGraph, euler: dict[str, int], extra_vertices=(), remove=(),
             add_edges=(), drop_edges=()) -> PlumbingGraph:
    drop = {_normalize_edge(*edge) for edge in drop_edges}
    vertices = [(v, euler.get(v, e)) for v, e in g.vertices if v not in remove]
    vertices += list(extra_vertices)
    edges = [edge for edge in g.edges if edge not in drop and not (set(edge) & set(remove))]
    edges += [_normalize_edge(*edge) for edge in add_edges]
    return PlumbingGraph.build(vertices, edges)


def blow_up_edge(g: PlumbingGraph, edge: tuple[str, str]) -> PlumbingGraph:
    v, w = edge
    if v not in g or w not in g or not g.has_edge(v, w):
        raise GraphError(f"edge {v!r}-{w!r} not in graph")
    u = g.fresh_id(f"{v}-{w}")
    return _replace(
        g,
        {v: g.euler(v) - 1, w: g.euler(w) - 1},
        extra_vertices=[(u, -1)],
        add_edges=[(v, u), (u, w)],
        drop_edges=[(v, w)],
    )


def blow_up_vertex(g: PlumbingGraph, v: str) -> PlumbingGraph:
    if v not in g:
        raise GraphError(f"vertex {v!r} not in graph")
    u = g.fresh_id(v)
    return _replace(g, {v: g.euler(v) - 1}, extra_vertices=[(u, -1)], add_edges=[(v, u)])


def blow_down(g: PlumbingGraph, v: str) -> PlumbingGraph:
    if v not in g:
        raise GraphError(f"vertex {v!r} not in graph")
    if g.euler(v) != -1:
        raise GraphError(f"cannot blow down {v!r}: Euler number is {g.euler(v)}, not -1")
    nbrs = g.neighbors(v)
    if len(nbrs) > 2:
        raise GraphError(f"cannot blow down {v!r}: valency {len(nbrs)} > 2")
    if g.size == 1:
        raise GraphError("cannot blow down the only vertex")
    euler = {w: g.euler(w) + 1 for w in nbrs}
    add = [tuple(nbrs)] if len(nbrs) == 2 else []
    return _replace(g, euler, remove={v}, add_edges=add)


def delete_end_vertex(g: PlumbingGraph, u: str) -> PlumbingGraph:
    if u not in g:
        raise GraphError(f"vertex {u!r} not in graph")
    if g.size < 2:
        raise GraphError("graph has a single vertex")
    if g.valency(u) != 1:
        raise GraphError(f"{u!r} is not an end-vertex (valency {g.valency(u)})")
    return _replace(g, {}, remove={u})
