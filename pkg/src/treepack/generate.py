"""Seeded instance generators.

Every generator returns a TreeFamily with orders n, n-1, ..., n-t+1 and is a
pure function of its arguments.
"""

from __future__ import annotations

import math

import numpy as np

from treepack.graph import Tree, random_prufer_tree
from treepack.instance import TreeFamily

KINDS = ("random", "star", "path", "spider", "broom", "caterpillar", "mixed", "highdeg")


def spider(m: int) -> Tree:
    """Center 0 with legs of two edges (one short leg when m is even)."""
    edges = []
    v = 1
    while v < m:
        edges.append((0, v))
        if v + 1 < m:
            edges.append((v, v + 1))
        v += 2
    return Tree.from_edges(m, edges)


def broom(m: int, bristles: int) -> Tree:
    """Path on m - bristles vertices with ``bristles`` leaves on its last vertex."""
    handle = m - bristles
    if handle < 2 or bristles < 1:
        raise ValueError("broom needs a handle of at least 2 vertices and one bristle")
    edges = [(v, v + 1) for v in range(handle - 1)]
    edges += [(handle - 1, handle + b) for b in range(bristles)]
    return Tree.from_edges(m, edges)


def caterpillar(m: int, pendants: int, rng: np.random.Generator, window: float = 1.0) -> Tree:
    """Spine with ``pendants`` leaves on distinct spine vertices.

    The pendant positions are drawn from the first ``window`` fraction of the
    spine, which leaves a long bare stretch when ``window`` is small.
    """
    spine = m - pendants
    if pendants > spine:
        raise ValueError("more pendants than spine vertices")
    edges = [(v, v + 1) for v in range(spine - 1)]
    span = max(pendants, int(spine * window))
    where = np.sort(rng.choice(span, size=pendants, replace=False))
    edges += [(int(s), spine + k) for k, s in enumerate(where)]
    return _shuffled(Tree.from_edges(m, edges), rng)


def _shuffled(t: Tree, rng: np.random.Generator) -> Tree:
    return t.relabel(rng.permutation(t.m).tolist())


def leafy(m: int, rng: np.random.Generator, hubs: int = 2, share: float = 0.4) -> Tree:
    """Random base tree plus ``share * m`` leaves spread over ``hubs`` base vertices."""
    extra = int(m * share)
    base = m - extra
    t = random_prufer_tree(base, rng)
    edges = t.edges()
    owners = rng.choice(base, size=hubs, replace=False)
    for k in range(extra):
        edges.append((int(owners[k % hubs]), base + k))
    return _shuffled(Tree.from_edges(m, edges), rng)


def pendant_cluster(m: int, rng: np.random.Generator) -> Tree:
    """Caterpillar whose pendants crowd one end, leaving a long bare spine."""
    # about sqrt(m)/2 pendants keeps the independent-leaf count under every profile's threshold
    pendants = max(1, int(math.isqrt(m) * rng.uniform(0.3, 0.9)))
    return caterpillar(m, pendants, rng, window=0.2)


def hub_of_subtrees(m: int, rng: np.random.Generator, branches: int) -> Tree:
    """Vertex 0 joined to the roots of ``branches`` small random subtrees."""
    sizes = np.full(branches, (m - 1) // branches)
    sizes[: (m - 1) - int(sizes.sum())] += 1
    edges = []
    nxt = 1
    for s in sizes.tolist():
        sub = random_prufer_tree(s, rng) if s >= 2 else None
        if sub is not None:
            edges += [(a + nxt, b + nxt) for a, b in sub.edges()]
        edges.append((0, nxt))
        nxt += s
    return _shuffled(Tree.from_edges(m, edges), rng)


def high_degree_tree(m: int, rng: np.random.Generator, degree: int, shape: int) -> Tree:
    """Trees with one vertex of degree about ``degree`` (shape 0: many leaves, shape 1: many branches)."""
    if shape == 0:
        base = m - degree
        t = random_prufer_tree(base, rng)
        owner = int(rng.integers(base))
        edges = t.edges() + [(owner, base + k) for k in range(degree)]
        return _shuffled(Tree.from_edges(m, edges), rng)
    return hub_of_subtrees(m, rng, degree)


def generate(kind: str, n: int, t: int, variant: str = "kn", seed: int = 0) -> TreeFamily:
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    if not 1 <= t <= n - 1:
        raise ValueError(f"need 1 <= t <= n-1, got t={t}, n={n}")
    rng = np.random.default_rng(seed)
    orders = [n - i for i in range(t)]
    if kind == "random":
        trees = [random_prufer_tree(m, rng) for m in orders]
    elif kind == "star":
        trees = [Tree.star(m) for m in orders]
    elif kind == "path":
        trees = [Tree.path(m) for m in orders]
    elif kind == "spider":
        trees = [spider(m) for m in orders]
    elif kind == "broom":
        trees = [broom(m, max(1, m // 10)) for m in orders]
    elif kind == "caterpillar":
        trees = [caterpillar(m, m // 4, rng) for m in orders]
    elif kind == "highdeg":
        deg = max(2 * round(n ** (2 / 3)) + 8, 3)
        trees = [high_degree_tree(m, rng, deg, i % 2) for i, m in enumerate(orders)]
    else:
        trees = _mixed(orders, variant, rng)
    return TreeFamily(n, variant, trees)


def _mixed(orders, variant, rng):
    """One leafy, one random and one bare-spined tree per block of three, in seeded order."""
    trees = []
    shapes = []
    while len(shapes) < len(orders):
        shapes += rng.permutation(3).tolist()
    for m, shape in zip(orders, shapes):
        if shape == 0:
            if variant == "kn1" and rng.random() < 0.25:
                trees.append(Tree.star(m))
            else:
                trees.append(leafy(m, rng))
        elif shape == 1:
            trees.append(random_prufer_tree(m, rng))
        else:
            trees.append(pendant_cluster(m, rng))
    return trees
