"""Named test graphs: fixtures, chains, the D/E trees and seeded random trees."""
from __future__ import annotations

import itertools

import numpy as np

from .graph import PlumbingGraph, validate
from .lattice import LatticeContext


def chain(eulers, prefix: str = "v") -> PlumbingGraph:
    ids = [f"{prefix}{i}" for i in range(len(eulers))]
    return PlumbingGraph.build(zip(ids, eulers), zip(ids, ids[1:]))


def star(center: int, arms) -> PlumbingGraph:
    """A centre with chains attached; ``arms`` lists the Euler numbers along each arm."""
    vertices = [("c", center)]
    edges = []
    for j, arm in enumerate(arms):
        prev = "c"
        for k, e in enumerate(arm):
            vid = f"a{j}{k}"
            vertices.append((vid, e))
            edges.append((prev, vid))
            prev = vid
    return PlumbingGraph.build(vertices, edges)


def dynkin_d(n: int) -> PlumbingGraph:
    return star(-2, [[-2], [-2], [-2] * (n - 3)])


def dynkin_e(n: int) -> PlumbingGraph:
    return star(-2, [[-2], [-2, -2], [-2] * (n - 4)])


G1 = chain([-2])
G2 = chain([-1])
G3 = dynkin_e(8)
G4 = dynkin_d(4)
G5 = chain([-2, -2])

FIXTURES = {"G1": G1, "G2": G2, "G3": G3, "G4": G4, "G5": G5}


def determinant(g: PlumbingGraph) -> int:
    return LatticeContext(g).d


def random_tree(rng: np.random.Generator, s: int, eulers=(-1, -2, -2, -2, -3, -4)) -> PlumbingGraph:
    """Random labelled tree on s vertices (random parent attachment) with random weights."""
    ids = [f"r{i}" for i in range(s)]
    edges = [(ids[int(rng.integers(0, i))], ids[i]) for i in range(1, s)]
    es = [int(rng.choice(eulers)) for _ in range(s)]
    return PlumbingGraph.build(zip(ids, es), edges)


def random_trees(count: int, seed: int = 2024, max_s: int = 8, max_d: int = 60,
                 min_s: int = 3) -> list[PlumbingGraph]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        g = random_tree(rng, int(rng.integers(min_s, max_s + 1)))
        if validate(g) and determinant(g) <= max_d:
            out.append(g)
    return out


def chain_corpus(max_len: int = 3, max_d: int = 60) -> dict[str, PlumbingGraph]:
    """Chains with entries in -2..-5, one per reversal pair, with det <= max_d."""
    out = {}
    for n in range(1, max_len + 1):
        for es in itertools.product(range(-2, -6, -1), repeat=n):
            if tuple(reversed(es)) < es:
                continue
            g = chain(list(es))
            if determinant(g) <= max_d:
                out["chain" + "".join(str(-e) for e in es)] = g
    return out


def standard_corpus(random_count: int = 8, seed: int = 2024) -> dict[str, PlumbingGraph]:
    """The graphs used for cross-route checks: every graph has s <= 8 and d <= 60."""
    graphs: dict[str, PlumbingGraph] = dict(FIXTURES)
    for n in range(3, 9):
        graphs[f"A{n}"] = chain([-2] * n)
    for name, g in chain_corpus(2).items():
        graphs.setdefault(name, g)
    for es in ([-2, -3, -2], [-3, -2, -3], [-2, -5, -2], [-3, -3, -3], [-2, -2, -5], [-4, -2, -3]):
        graphs["chain" + "".join(str(-e) for e in es)] = chain(es)
    graphs["D5"] = dynkin_d(5)
    graphs["E6"] = dynkin_e(6)
    graphs["E7"] = dynkin_e(7)
    graphs["star233"] = star(-2, [[-2], [-3], [-3]])
    graphs["star237"] = star(-1, [[-2], [-3], [-7]])
    graphs["star-3"] = star(-3, [[-2], [-2], [-2]])
    graphs["star2311"] = star(-1, [[-2], [-3], [-11]])
    graphs["star334"] = star(-1, [[-3], [-3], [-4]])
    graphs["star255"] = star(-1, [[-2], [-5], [-5]])
    for i, g in enumerate(random_trees(random_count, seed)):
        graphs[f"random{i}"] = g
    return graphs


def small_corpus() -> dict[str, PlumbingGraph]:
    """A quick subset for unit tests."""
    names = ["G1", "G2", "G3", "G4", "G5", "A3", "chain23", "chain5", "chain222", "E6", "star-3"]
    full = standard_corpus(0)
    full["chain222"] = chain([-2, -2, -2])
    return {n: full[n] for n in names if n in full}
