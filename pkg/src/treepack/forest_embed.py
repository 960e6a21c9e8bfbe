"""Randomized greedy packing of forests into a clique zone of the host.

Each forest is placed vertex by vertex (largest component first, BFS from
its max-degree vertex, isolated vertices last). A vertex goes to a free host
vertex whose edge to its parent's image is uncolored. Dead ends are repaired
by moving an already placed vertex, then the forest restarts with a fresh
order. Edges are colored only once the whole forest is placed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from treepack.graph import EdgeColoring, Forest

log = logging.getLogger(__name__)


class EmbedFailure(RuntimeError):
    def __init__(self, msg, forest_index=None, vertex=None):
        super().__init__(msg)
        self.forest_index = forest_index
        self.vertex = vertex


@dataclass(frozen=True)
class EmbedBudget:
    max_restarts_per_forest: int = 20
    max_repair_depth: int = 64
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_restarts_per_forest < 1 or self.max_repair_depth < 1:
            raise ValueError("budget bounds must be positive")


def placement_order(f: Forest, rng: np.random.Generator | None = None) -> tuple[list[int], list[int]]:
    """Vertex order and parent (or -1) per position.

    Components by decreasing size, each traversed breadth-first from a
    max-degree vertex; isolated vertices come last. ``rng`` shuffles ties
    and child order for restarts.
    """
    deg = f.deg
    comps = f.component_lists()
    if rng is None:
        keys = [(-len(c), min(c)) for c in comps]
    else:
        keys = [(-len(c), rng.random()) for c in comps]
    comps = [c for _, c in sorted(zip(keys, comps), key=lambda kc: kc[0])]
    order, parents = [], []
    seen = [False] * f.m
    for comp in comps:
        root = max(comp, key=lambda v: (deg[v], -v)) if rng is None else max(comp, key=lambda v: (deg[v], rng.random()))
        seen[root] = True
        order.append(root)
        parents.append(-1)
        head = len(order) - 1
        while head < len(order):
            u = order[head]
            head += 1
            kids = [w for w in f.adj[u] if not seen[w]]
            if rng is not None:
                kids = [kids[x] for x in rng.permutation(len(kids))]
            for w in kids:
                seen[w] = True
                order.append(w)
                parents.append(u)
    return order, parents


def _zone_colored_degree(coloring: EdgeColoring, zone: range) -> np.ndarray:
    z = np.arange(zone.start, zone.stop)
    out = np.zeros(len(z), dtype=np.int64)
    for a in range(len(z)):
        out[a] = np.count_nonzero(coloring.row(int(z[a]), z))
    return out


def embed_one_forest(
    f: Forest,
    free_degree: np.ndarray,
    coloring: EdgeColoring,
    zone: range,
    budget: EmbedBudget,
    rng: np.random.Generator,
    forest_index: int | None = None,
) -> list[int]:
    """Injective map of ``f`` into ``zone`` whose edges are all uncolored.

    ``free_degree[a]`` is the uncolored degree of ``zone[a]`` inside the zone;
    it is used for the pigeonhole pre-check and to seat high-degree vertices.
    Nothing is colored here.
    """
    m = len(zone)
    if f.m > m:
        raise EmbedFailure(f"forest of order {f.m} does not fit a zone of {m}", forest_index)
    deg = f.deg
    if f.m and max(deg) > int(free_degree.max(initial=0)):
        v = int(np.argmax(deg))
        raise EmbedFailure(
            f"vertex {v} has degree {deg[v]} but no zone vertex has that many free edges",
            forest_index,
            v,
        )
    heavy = max(4, m // 20)
    last_err = None
    for attempt in range(budget.max_restarts_per_forest):
        order, parents = placement_order(f, None if attempt == 0 else rng)
        try:
            return _place(f, order, parents, deg, heavy, free_degree, coloring, zone, budget, rng)
        except EmbedFailure as exc:
            exc.forest_index = forest_index
            last_err = exc
    raise last_err


def _place(f, order, parents, deg, heavy, free_degree, coloring, zone, budget, rng):
    z0 = zone.start
    m = len(zone)
    image = [-1] * f.m
    owner = np.full(m, -1, dtype=np.int64)  # zone slot -> forest vertex
    free = list(range(m))
    pos = list(range(m))

    def take(slot):
        p = pos[slot]
        last = free[-1]
        free[p] = last
        pos[last] = p
        free.pop()

    def edge_free(a, b):
        return coloring.get(z0 + a, z0 + b) == 0

    repairs = 0
    for v, par in zip(order, parents):
        slot = -1
        if par == -1:
            if deg[v] >= heavy:
                cand = np.array(free)
                slot = int(cand[np.argmax(free_degree[cand])])
            else:
                slot = free[int(rng.integers(len(free)))]
        else:
            ps = image[par]
            if deg[v] >= heavy:
                cand = np.array(free)
                ok = coloring.row(z0 + ps, cand + z0) == 0
                if ok.any():
                    cand = cand[ok]
                    slot = int(cand[np.argmax(free_degree[cand])])
            else:
                for _ in range(min(24, len(free))):
                    s = free[int(rng.integers(len(free)))]
                    if edge_free(ps, s):
                        slot = s
                        break
                if slot == -1:
                    cand = np.array(free)
                    ok = np.flatnonzero(coloring.row(z0 + ps, cand + z0) == 0)
                    if ok.size:
                        slot = int(cand[ok[int(rng.integers(ok.size))]])
            if slot == -1:
                if repairs >= budget.max_repair_depth:
                    raise EmbedFailure(f"repair budget exhausted at vertex {v}", vertex=v)
                repairs += 1
                move = _repair(f, ps, image, owner, free, coloring, z0, rng, budget.max_repair_depth)
                if move is None:
                    raise EmbedFailure(f"dead end at vertex {v}", vertex=v)
                u, y, w = move
                image[u] = w
                owner[w] = u
                take(w)
                image[v] = y
                owner[y] = v
                continue
        image[v] = slot
        owner[slot] = v
        take(slot)
    return [z0 + s for s in image]


def _repair(f, ps, image, owner, free, coloring, z0, rng, tries):
    """Find a placed vertex u on a slot y with y-ps uncolored that can move to a free slot w.

    Returns (u, y, w) or None; the caller performs the move and seats the
    blocked vertex on y.
    """
    m = len(owner)
    row = coloring.row(z0 + ps, np.arange(z0, z0 + m)) == 0
    row[ps] = False
    occupied = np.flatnonzero(row & (owner >= 0))
    if occupied.size == 0:
        return None
    free_arr = np.array(free)
    for idx in rng.permutation(occupied.size)[:tries]:
        y = int(occupied[idx])
        u = int(owner[y])
        ok = np.ones(free_arr.size, dtype=bool)
        for w in f.adj[u]:
            if image[w] >= 0:
                ok &= coloring.row(z0 + image[w], free_arr + z0) == 0
        if ok.any():
            return u, y, int(free_arr[np.flatnonzero(ok)[0]])
    return None


def pack_forests(
    forests: Sequence[Forest],
    m: int,
    budget: EmbedBudget,
    coloring: EdgeColoring,
    zone: range,
    colors: Sequence[int] | None = None,
    rng: np.random.Generator | None = None,
) -> list[list[int]]:
    """Embed and color each forest in turn; returns one vertex map per forest."""
    if len(zone) != m:
        raise ValueError(f"zone has {len(zone)} vertices, expected {m}")
    colors = list(colors) if colors is not None else list(range(1, len(forests) + 1))
    rng = rng if rng is not None else np.random.default_rng(budget.rng_seed)
    t = max(len(forests), 1)
    free_degree = (m - 1) - _zone_colored_degree(coloring, zone)
    maps = []
    for idx, (f, i) in enumerate(zip(forests, colors)):
        if f.max_degree() >= m / (3 * t):
            log.warning("forest %d has max degree %d >= m/(3t) = %.1f", i, f.max_degree(), m / (3 * t))
        image = embed_one_forest(f, free_degree, coloring, zone, budget, rng, forest_index=i)
        if f.edges:
            us = [image[a] for a, _ in f.edges]
            vs = [image[b] for _, b in f.edges]
            coloring.color_edges(us, vs, i)
            np.subtract.at(free_degree, np.array(us) - zone.start, 1)
            np.subtract.at(free_degree, np.array(vs) - zone.start, 1)
        maps.append(image)
    return maps
