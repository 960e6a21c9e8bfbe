"""Edge-disjoint stars and paths in K_{3k} with pairwise-distinct path endpoints.

Item ``j`` (1-based) has order ``3k - j + 1`` and is drawn in color ``j``.
Two engines: a rotational zigzag construction, then a randomized
backtracking search when the zigzag layout breaks an invariant. Star-center
pins are applied afterwards by relabeling the clique, which is always
possible because star centers are distinct.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from treepack.graph import EdgeColoring

STAR = "star"
PATH = "path"


class StarPathInfeasible(RuntimeError):
    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


@dataclass
class StarPathRequest:
    k: int
    shapes: list[tuple[str, int]]
    star_center_pins: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if len(self.shapes) > self.k:
            raise ValueError("at most k items")
        for j, (kind, order) in enumerate(self.shapes, start=1):
            if kind not in (STAR, PATH):
                raise ValueError(f"unknown kind {kind!r}")
            if order != 3 * self.k - j + 1:
                raise ValueError(f"item {j} must have order {3 * self.k - j + 1}, got {order}")
        pins = self.star_center_pins
        for j, v in pins.items():
            if not 1 <= j <= len(self.shapes) or self.shapes[j - 1][0] != STAR:
                raise ValueError(f"pin on item {j}, which is not a star")
            if not 0 <= v < 3 * self.k:
                raise ValueError(f"pin {v} outside K_{3 * self.k}")
        if len(set(pins.values())) != len(pins):
            raise ValueError("pinned centers must be distinct")

    @classmethod
    def from_kinds(cls, k: int, kinds, pins=None) -> "StarPathRequest":
        shapes = [(kind, 3 * k - j) for j, kind in enumerate(kinds)]
        return cls(k, shapes, dict(pins or {}))


@dataclass
class StarPathLayout:
    coloring: EdgeColoring
    path_endpoints: dict[int, tuple[int, int]]
    paths: dict[int, list[int]]
    stars: dict[int, tuple[int, list[int]]]
    engine: str = ""


def zigzag(start: int, order: int, size: int) -> list[int]:
    """start, start+1, start-1, start+2, start-2, ... modulo ``size``."""
    seq = [start % size]
    step = 1
    while len(seq) < order:
        seq.append((start + step) % size)
        if len(seq) < order:
            seq.append((start - step) % size)
        step += 1
    return seq


def _rotational(req: StarPathRequest):
    size = 3 * req.k
    used = np.zeros((size, size), dtype=bool)
    np.fill_diagonal(used, True)
    paths, stars = {}, {}
    start = 0
    for j, (kind, order) in enumerate(req.shapes, start=1):
        if kind != PATH:
            continue
        seq = zigzag(start, order, size)
        start += 1
        for a, b in zip(seq, seq[1:]):
            if used[a, b]:
                return None
            used[a, b] = used[b, a] = True
        paths[j] = seq
    centers = set()
    for j, (kind, order) in enumerate(req.shapes, start=1):
        if kind != STAR:
            continue
        for c in range(size):
            if c in centers:
                continue
            free = np.flatnonzero(~used[c])
            if free.size >= order - 1:
                leaves = free[: order - 1].tolist()
                used[c, leaves] = used[leaves, c] = True
                stars[j] = (c, leaves)
                centers.add(c)
                break
        else:
            return None
    return paths, stars


def _backtracking(req: StarPathRequest, seed: int, attempts: int, node_limit: int):
    size = 3 * req.k
    rng = np.random.default_rng(seed)
    for attempt in range(attempts):
        used = np.zeros((size, size), dtype=bool)
        np.fill_diagonal(used, True)
        paths, stars = {}, {}
        ends: set[int] = set()
        ok = True
        # odd attempts fix all centers up front so earlier stars can avoid later ones
        star_items = [j for j, (kind, _) in enumerate(req.shapes, start=1) if kind == STAR]
        centers = rng.permutation(size)[: len(star_items)].tolist()
        nested = attempt % 2 == 1
        for pos, j in enumerate(star_items):
            order = req.shapes[j - 1][1]
            free_deg = (~used).sum(axis=1)
            if nested:
                c = centers[pos]
                later = set(centers[pos + 1 :])
            else:
                taken = {sc for sc, _ in stars.values()}
                c = max((v for v in rng.permutation(size).tolist() if v not in taken), key=lambda v: free_deg[v])
                later = set()
            free = np.flatnonzero(~used[c]).tolist()
            if len(free) < order - 1:
                ok = False
                break
            # leaves with the most spare capacity first keep paths routable
            free.sort(key=lambda v: (v in later, -free_deg[v], rng.random()))
            leaves = sorted(free[: order - 1])
            used[c, leaves] = used[leaves, c] = True
            stars[j] = (c, leaves)
        if not ok:
            continue
        for j, (kind, order) in enumerate(req.shapes, start=1):
            if kind != PATH:
                continue
            seq = _path_dfs(used, order, ends, rng, node_limit)
            if seq is None:
                ok = False
                break
            for a, b in zip(seq, seq[1:]):
                used[a, b] = used[b, a] = True
            paths[j] = seq
            ends.update((seq[0], seq[-1]))
        if ok:
            return paths, stars
    return None


def _path_dfs(used, order, ends, rng, node_limit):
    size = used.shape[0]
    free_deg = (~used).sum(axis=1)
    starts = [v for v in rng.permutation(size).tolist() if v not in ends and free_deg[v] >= 1]
    budget = [node_limit]
    for s in starts:
        path = [s]
        on = {s}
        if _extend(used, order, ends, rng, path, on, budget):
            return path
        if budget[0] <= 0:
            return None
    return None


def _extend(used, order, ends, rng, path, on, budget):
    if len(path) == order:
        return path[-1] not in ends
    budget[0] -= 1
    if budget[0] <= 0:
        return False
    cur = path[-1]
    nxt = [w for w in np.flatnonzero(~used[cur]).tolist() if w not in on]
    last = len(path) + 1 == order
    if last:
        nxt = [w for w in nxt if w not in ends]
    # Warnsdorff: fewest onward options first, random tie-break
    onward = {w: int(np.count_nonzero(~used[w])) for w in nxt}
    nxt.sort(key=lambda w: (onward[w], rng.random()))
    for w in nxt:
        path.append(w)
        on.add(w)
        if _extend(used, order, ends, rng, path, on, budget):
            return True
        path.pop()
        on.discard(w)
    return False


def _build_layout(req, paths, stars, engine) -> StarPathLayout:
    size = 3 * req.k
    perm = list(range(size))
    if req.star_center_pins:
        perm = [-1] * size
        for j, pin in req.star_center_pins.items():
            perm[stars[j][0]] = pin
        rest = iter(sorted(set(range(size)) - set(req.star_center_pins.values())))
        for v in range(size):
            if perm[v] == -1:
                perm[v] = next(rest)
    paths = {j: [perm[v] for v in seq] for j, seq in paths.items()}
    stars = {j: (perm[c], sorted(perm[v] for v in leaves)) for j, (c, leaves) in stars.items()}
    col = EdgeColoring(size, max(req.k, 1))
    for j, seq in paths.items():
        col.color_edges(seq[:-1], seq[1:], j)
    for j, (c, leaves) in stars.items():
        col.color_edges([c] * len(leaves), leaves, j)
    ends = {j: (seq[0], seq[-1]) for j, seq in paths.items()}
    return StarPathLayout(col, ends, paths, stars, engine)


def pack_stars_paths(
    req: StarPathRequest, seed: int = 0, attempts: int = 500, node_limit: int = 200, rounds: int = 8
) -> StarPathLayout:
    if not req.shapes:
        return _build_layout(req, {}, {}, "empty")
    found = _rotational(req)
    if found is not None:
        layout = _build_layout(req, *found, "rotational")
        if not verify_layout(req, layout):
            return layout
    found = None
    for r in range(rounds):
        found = _backtracking(req, [seed, r], attempts, node_limit)
        if found is not None:
            break
    if found is None:
        raise StarPathInfeasible(f"no layout found for {req.shapes}")
    layout = _build_layout(req, *found, "backtracking")
    problems = verify_layout(req, layout)
    if problems:
        raise StarPathInfeasible("; ".join(problems), layout)
    return layout


def verify_layout(req: StarPathRequest, layout: StarPathLayout) -> list[str]:
    """Re-derive every layout invariant from the coloring alone."""
    size = 3 * req.k
    col = layout.coloring
    problems = []
    if col.N != size:
        return [f"coloring is on {col.N} vertices, expected {size}"]
    u, v, c = col.colored_edges()
    if c.size and (c.max() > len(req.shapes)):
        problems.append("color outside the item range")
    endpoints = []
    for j, (kind, order) in enumerate(req.shapes, start=1):
        sel = c == j
        if int(sel.sum()) != order - 1:
            problems.append(f"item {j}: {int(sel.sum())} edges, expected {order - 1}")
            continue
        deg = np.bincount(np.concatenate([u[sel], v[sel]]), minlength=size)
        touched = np.flatnonzero(deg)
        if touched.size != order or not _connected(u[sel], v[sel], touched):
            problems.append(f"item {j}: not a tree on {order} vertices")
            continue
        if kind == STAR:
            centers = np.flatnonzero(deg == order - 1) if order > 2 else touched[:1]
            if centers.size == 0:
                problems.append(f"item {j}: not a star")
                continue
            pin = req.star_center_pins.get(j)
            if pin is not None and deg[pin] != order - 1 and order > 2:
                problems.append(f"item {j}: center not on pin {pin}")
        else:
            if deg.max() > 2:
                problems.append(f"item {j}: not a path")
                continue
            ends = np.flatnonzero(deg == 1).tolist()
            endpoints.extend(ends)
    if len(set(endpoints)) != len(endpoints):
        problems.append("path endpoints are not pairwise distinct")
    return problems


def _connected(us, vs, verts) -> bool:
    parent = {int(x): int(x) for x in verts}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in zip(us.tolist(), vs.tolist()):
        parent[find(a)] = find(b)
    return len({find(x) for x in parent}) == 1
