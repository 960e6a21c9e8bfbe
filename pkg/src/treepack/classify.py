"""Tree taxonomy (type I / type II / path-like) and certificate extraction.

Note on the leaf cover: the leaf neighbourhoods of two distinct vertices are
disjoint (a leaf has exactly one neighbour), so picking vertices by
descending leaf count is an exact maximiser of covered leaves for any cover
budget. No search is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from treepack.graph import Tree

TYPE_I = "TypeI"
TYPE_II = "TypeII"
PATH_LIKE = "PathLike"


class NotFoundError(LookupError):
    pass


class ClassificationError(RuntimeError):
    """Thresholds inconsistent with the tree (the instance is too small)."""


@dataclass(frozen=True)
class Thresholds:
    cover_size: int
    leaf_count: int
    high_degree: int
    bare_path_len: int
    spaced_count: int

    def __post_init__(self):
        for name in ("cover_size", "leaf_count", "high_degree", "bare_path_len", "spaced_count"):
            if getattr(self, name) <= 0:
                raise ValueError(f"threshold {name} must be positive")
        if self.leaf_count < self.cover_size:
            raise ValueError("leaf_count must be at least cover_size")


@dataclass
class TreeClass:
    tag: str
    star: bool = False
    cover: list[int] = field(default_factory=list)
    covered_leaves: list[int] = field(default_factory=list)
    independent: list[int] = field(default_factory=list)
    bare_path: list[int] = field(default_factory=list)
    spaced: list[int] = field(default_factory=list)


def leaf_parents(t: Tree) -> dict[int, list[int]]:
    """Map each vertex to its sorted list of leaf neighbours (only non-empty lists)."""
    out: dict[int, list[int]] = {}
    for v in range(t.m):
        if len(t.adj[v]) == 1:
            out.setdefault(t.adj[v][0], []).append(v)
    return out


def independent_leaves(t: Tree) -> list[int]:
    return sorted(leaves[0] for leaves in leaf_parents(t).values())


def greedy_leaf_cover(t: Tree, max_cover: int) -> tuple[list[int], int]:
    if max_cover < 1:
        raise ValueError("max_cover must be at least 1")
    lp = leaf_parents(t)
    ranked = sorted(lp, key=lambda v: (-len(lp[v]), v))[:max_cover]
    return sorted(ranked), sum(len(lp[v]) for v in ranked)


def degree2_chains(t: Tree) -> list[list[int]]:
    """Maximal runs of degree-2 vertices, each as an ordered vertex list."""
    deg = t.deg
    seen = [False] * t.m
    chains = []
    for s in range(t.m):
        if deg[s] != 2 or seen[s]:
            continue
        # walk to one end of the run, then collect forward
        prev, cur = -1, s
        while True:
            nxt = [w for w in t.adj[cur] if w != prev and deg[w] == 2]
            if not nxt or nxt[0] == s:
                break
            prev, cur = cur, nxt[0]
        chain = [cur]
        seen[cur] = True
        prev = -1
        while True:
            nxt = [w for w in t.adj[cur] if w != prev and deg[w] == 2 and not seen[w]]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            seen[cur] = True
            chain.append(cur)
        if chain[0] > chain[-1]:
            chain.reverse()
        chains.append(chain)
    return chains


def extract_bare_path(t: Tree, length: int) -> list[int]:
    """``length`` consecutive degree-2 vertices; their two outer neighbours may have any degree."""
    if length < 1:
        raise ValueError("length must be positive")
    chains = degree2_chains(t)
    if chains:
        longest = min(chains, key=lambda c: (-len(c), c[0]))
        if len(longest) >= length:
            return longest[:length]
    raise NotFoundError(f"no run of {length} degree-2 vertices")


def path_outer_neighbors(t: Tree, path: list[int]) -> tuple[int, int]:
    """The neighbours of the two path ends that lie outside the path."""
    inside = set(path)
    if len(path) == 1:
        a, b = t.adj[path[0]]
        return a, b
    first = next(w for w in t.adj[path[0]] if w not in inside)
    last = next(w for w in t.adj[path[-1]] if w not in inside)
    return first, last


def extract_spaced(
    t: Tree, count: int, forbidden: Iterable[int] = (), separation: int = 2
) -> list[int]:
    """Degree-2 vertices at pairwise distance >= ``separation``, away from ``forbidden``.

    Chosen vertices are never in, nor adjacent to, ``forbidden``. Greedy scan
    in label order.
    """
    if separation not in (2, 3):
        raise ValueError("separation must be 2 or 3")
    forbidden = set(forbidden)
    blocked = set(forbidden)
    for f in forbidden:
        blocked.update(t.adj[f])
    taken: set[int] = set()
    chosen = []
    for v in range(t.m):
        if len(chosen) == count:
            break
        if len(t.adj[v]) != 2 or v in blocked:
            continue
        if separation == 2:
            if v in taken:
                continue
        elif v in taken or any(w in taken or w in forbidden for w in t.adj[v]):
            continue
        chosen.append(v)
        taken.add(v)
        taken.update(t.adj[v])
    if len(chosen) < count:
        raise NotFoundError(f"only {len(chosen)} spaced degree-2 vertices, {count} required")
    return chosen


def classify(t: Tree, th: Thresholds) -> TreeClass:
    cover, covered = greedy_leaf_cover(t, th.cover_size)
    if covered >= th.leaf_count:
        lp = leaf_parents(t)
        leaves = sorted(v for c in cover for v in lp.get(c, ()))
        return TreeClass(TYPE_I, star=t.is_star(), cover=cover, covered_leaves=leaves)
    indep = independent_leaves(t)
    if len(indep) >= th.leaf_count:
        return TreeClass(TYPE_II, independent=indep)
    try:
        path = extract_bare_path(t, th.bare_path_len - 2)
        spaced = extract_spaced(t, th.spaced_count, forbidden=path)
    except NotFoundError as exc:
        raise ClassificationError(f"path-like tree lacks its certificate: {exc}") from exc
    return TreeClass(PATH_LIKE, bare_path=path, spaced=spaced)


def check_certificate(t: Tree, cls: TreeClass, th: Thresholds) -> list[str]:
    """Re-check a certificate against its invariants; returns the violated ones."""
    deg = t.deg
    bad = []
    if cls.tag == TYPE_I:
        if len(cls.cover) > th.cover_size:
            bad.append("cover too large")
        cov = set(cls.cover)
        if any(deg[v] != 1 or t.adj[v][0] not in cov for v in cls.covered_leaves):
            bad.append("covered vertex is not a leaf of the cover")
        if len(set(cls.covered_leaves)) < th.leaf_count:
            bad.append("too few covered leaves")
        if cls.star != t.is_star():
            bad.append("star flag wrong")
    elif cls.tag == TYPE_II:
        parents = [t.adj[v][0] for v in cls.independent if deg[v] == 1]
        if len(parents) != len(cls.independent) or len(set(parents)) != len(parents):
            bad.append("leaves not independent")
        if len(cls.independent) < th.leaf_count:
            bad.append("too few independent leaves")
    elif cls.tag == PATH_LIKE:
        p = cls.bare_path
        if len(p) != th.bare_path_len - 2 or any(deg[v] != 2 for v in p):
            bad.append("bare path has a non-degree-2 vertex or wrong length")
        if any(p[k + 1] not in t.adj[p[k]] for k in range(len(p) - 1)):
            bad.append("bare path is not a path")
        s = cls.spaced
        ps = set(p)
        if len(s) < th.spaced_count or any(deg[v] != 2 for v in s):
            bad.append("spaced set too small or not degree 2")
        sset = set(s)
        for v in s:
            if v in ps or any(w in ps for w in t.adj[v]):
                bad.append("spaced vertex touches the bare path")
                break
            if any(w in sset for w in t.adj[v]):
                bad.append("spaced vertices adjacent")
                break
    else:
        bad.append(f"unknown tag {cls.tag}")
    return bad
