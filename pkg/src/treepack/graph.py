"""Core graph types: labeled trees, forests, host-clique edge colorings.

Vertices are always the contiguous integers ``0..m-1``. Adjacency lists are
kept sorted so that every traversal in the package is deterministic.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class MalformedSequenceError(ValueError):
    pass


class InvalidTreeError(ValueError):
    pass


class ColoringError(RuntimeError):
    """A write-once violation on an EdgeColoring (always a caller bug)."""


@dataclass
class Tree:
    m: int
    adj: list[list[int]]

    def __post_init__(self):
        if len(self.adj) != self.m:
            raise InvalidTreeError("adjacency length differs from m")

    @classmethod
    def from_edges(cls, m: int, edges: Iterable[tuple[int, int]]) -> "Tree":
        adj: list[list[int]] = [[] for _ in range(m)]
        count = 0
        for u, v in edges:
            if u == v or not (0 <= u < m and 0 <= v < m):
                raise InvalidTreeError(f"bad edge ({u}, {v})")
            adj[u].append(v)
            adj[v].append(u)
            count += 1
        for a in adj:
            a.sort()
        t = cls(m, adj)
        if count != m - 1 or not t.is_connected():
            raise InvalidTreeError("edge set is not a spanning tree")
        return t

    @classmethod
    def path(cls, m: int) -> "Tree":
        return cls.from_edges(m, [(i, i + 1) for i in range(m - 1)])

    @classmethod
    def star(cls, m: int, center: int = 0) -> "Tree":
        return cls.from_edges(m, [(center, v) for v in range(m) if v != center])

    @property
    def deg(self) -> list[int]:
        return [len(a) for a in self.adj]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.m) for v in self.adj[u] if u < v]

    def is_connected(self) -> bool:
        if self.m == 0:
            return True
        seen = [False] * self.m
        seen[0] = True
        stack = [0]
        while stack:
            u = stack.pop()
            for w in self.adj[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        return all(seen)

    def is_star(self) -> bool:
        return self.m >= 2 and max(self.deg) == self.m - 1

    def leaves(self) -> list[int]:
        return [v for v in range(self.m) if len(self.adj[v]) == 1]

    def relabel(self, perm: Sequence[int]) -> "Tree":
        """Return the tree with vertex ``v`` renamed ``perm[v]``."""
        return Tree.from_edges(self.m, [(perm[u], perm[v]) for u, v in self.edges()])

    def induced_forest(self, vertices: Sequence[int]) -> tuple["Forest", list[int]]:
        """Induced forest on ``vertices`` relabeled to ``0..k-1``; also returns the label map."""
        order = sorted(vertices)
        index = {v: i for i, v in enumerate(order)}
        edges = []
        for v in order:
            for w in self.adj[v]:
                if v < w and w in index:
                    edges.append((index[v], index[w]))
        return Forest.from_edges(len(order), edges), order


@dataclass
class Forest:
    m: int
    edges: list[tuple[int, int]]
    components: int = 0
    adj: list[list[int]] = field(default_factory=list, repr=False)

    @classmethod
    def from_edges(cls, m: int, edges: Iterable[tuple[int, int]]) -> "Forest":
        edges = [(min(u, v), max(u, v)) for u, v in edges]
        adj: list[list[int]] = [[] for _ in range(m)]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        for a in adj:
            a.sort()
        parent = list(range(m))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in edges:
            ru, rv = find(u), find(v)
            if ru == rv:
                raise InvalidTreeError("forest edge set contains a cycle")
            parent[ru] = rv
        return cls(m, edges, m - len(edges), adj)

    @property
    def deg(self) -> list[int]:
        return [len(a) for a in self.adj]

    def max_degree(self) -> int:
        return max(self.deg, default=0)

    def component_lists(self) -> list[list[int]]:
        seen = [False] * self.m
        comps = []
        for s in range(self.m):
            if seen[s]:
                continue
            seen[s] = True
            comp = [s]
            stack = [s]
            while stack:
                u = stack.pop()
                for w in self.adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        comp.append(w)
                        stack.append(w)
            comps.append(comp)
        return comps


# ---------------------------------------------------------------------------
# Pruefer codes


def prufer_decode(seq: Sequence[int], m: int) -> Tree:
    if m < 2:
        raise MalformedSequenceError("a Pruefer sequence needs m >= 2")
    if len(seq) != m - 2:
        raise MalformedSequenceError(f"sequence length {len(seq)} != m-2 = {m - 2}")
    degree = [1] * m
    for x in seq:
        if not 0 <= x < m:
            raise MalformedSequenceError(f"entry {x} outside [0, {m - 1}]")
        degree[x] += 1
    heap = [v for v in range(m) if degree[v] == 1]
    heapq.heapify(heap)
    edges = []
    for x in seq:
        leaf = heapq.heappop(heap)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(heap, x)
    u, v = heapq.heappop(heap), heapq.heappop(heap)
    edges.append((u, v))
    return Tree.from_edges(m, edges)


def prufer_encode(t: Tree) -> list[int]:
    m = t.m
    degree = t.deg
    removed = [False] * m
    heap = [v for v in range(m) if degree[v] == 1]
    heapq.heapify(heap)
    seq = []
    for _ in range(m - 2):
        leaf = heapq.heappop(heap)
        removed[leaf] = True
        nb = next(w for w in t.adj[leaf] if not removed[w])
        seq.append(nb)
        degree[nb] -= 1
        if degree[nb] == 1:
            heapq.heappush(heap, nb)
    return seq


def random_prufer_tree(m: int, rng: np.random.Generator) -> Tree:
    if m == 1:
        return Tree(1, [[]])
    return prufer_decode(rng.integers(0, m, size=m - 2).tolist(), m)


# ---------------------------------------------------------------------------
# AHU canonical codes


def tree_centers(t: Tree) -> list[int]:
    """Center or bicenter, by repeated leaf stripping."""
    if t.m <= 2:
        return list(range(t.m))
    degree = t.deg
    layer = [v for v in range(t.m) if degree[v] <= 1]
    remaining = t.m
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            for w in t.adj[v]:
                degree[w] -= 1
                if degree[w] == 1:
                    nxt.append(w)
        layer = nxt
    return sorted(layer)


def _rooted_code(t: Tree, root: int) -> bytes:
    parent = [-1] * t.m
    order = [root]
    parent[root] = root
    for u in order:
        for w in t.adj[u]:
            if parent[w] == -1:
                parent[w] = u
                order.append(w)
    children: list[list[bytes]] = [[] for _ in range(t.m)]
    code = b""
    for u in reversed(order):
        kids = children[u]
        kids.sort()
        code = b"(" + b"".join(kids) + b")"
        children[u] = []
        if u != root:
            children[parent[u]].append(code)
    return code


def ahu_canonical(t: Tree) -> bytes:
    """Isomorphism-invariant code; equal codes iff the trees are isomorphic."""
    if t.m == 0:
        return b""
    return min(_rooted_code(t, c) for c in tree_centers(t))


# ---------------------------------------------------------------------------
# Host clique coloring


def pair_index(N: int, u, v):
    """Flat upper-triangular cell of the unordered pair {u, v}; accepts arrays."""
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    return lo * (2 * N - lo - 1) // 2 + (hi - lo - 1)


class EdgeColoring:
    """Write-once edge coloring of K_N; color 0 means uncolored."""

    def __init__(self, N: int, t: int = 255):
        self.N = N
        self.t = t
        dtype = np.uint8 if t < 256 else np.uint16
        self.colors = np.zeros(N * (N - 1) // 2, dtype=dtype)

    def _idx(self, u: int, v: int) -> int:
        if u > v:
            u, v = v, u
        return u * (2 * self.N - u - 1) // 2 + (v - u - 1)

    def get(self, u: int, v: int) -> int:
        if u == v:
            raise ColoringError(f"self-loop {{{u},{u}}}")
        return int(self.colors[self._idx(u, v)])

    def color_edge(self, u: int, v: int, i: int) -> None:
        if u == v:
            raise ColoringError(f"self-loop {{{u},{u}}} cannot be colored")
        if not (0 <= u < self.N and 0 <= v < self.N):
            raise ColoringError(f"edge {{{u},{v}}} outside K_{self.N}")
        if i < 1:
            raise ColoringError(f"color {i} is not a valid color")
        k = self._idx(u, v)
        cur = self.colors[k]
        if cur:
            raise ColoringError(f"edge {{{u},{v}}} already has color {cur}; refusing color {i}")
        self.colors[k] = i

    def color_edges(self, us, vs, i: int) -> None:
        """Bulk version of color_edge; all-or-nothing."""
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        if us.size == 0:
            return
        if np.any(us == vs):
            raise ColoringError("self-loop in bulk coloring")
        if i < 1:
            raise ColoringError(f"color {i} is not a valid color")
        idx = pair_index(self.N, us, vs)
        if np.unique(idx).size != idx.size:
            raise ColoringError("duplicate edge in bulk coloring")
        busy = self.colors[idx] != 0
        if busy.any():
            j = int(np.flatnonzero(busy)[0])
            raise ColoringError(
                f"edge {{{us[j]},{vs[j]}}} already has color {self.colors[idx[j]]}; refusing color {i}"
            )
        self.colors[idx] = i

    def free_block(self, rows, cols) -> np.ndarray:
        """Boolean matrix: edge (rows[a], cols[b]) exists in K_N and is uncolored."""
        r = np.asarray(rows, dtype=np.int64)[:, None]
        c = np.asarray(cols, dtype=np.int64)[None, :]
        same = r == c
        idx = pair_index(self.N, r, np.where(same, (r + 1) % max(self.N, 1), c))
        return (self.colors[idx] == 0) & ~same

    def row(self, u: int, cols) -> np.ndarray:
        c = np.asarray(cols, dtype=np.int64)
        out = np.zeros(c.size, dtype=self.colors.dtype)
        mask = c != u
        out[mask] = self.colors[pair_index(self.N, u, c[mask])]
        return out

    def _decode(self, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        N = self.N
        starts = np.arange(N, dtype=np.int64)
        starts = starts * (2 * N - starts - 1) // 2
        u = np.searchsorted(starts, idx, side="right") - 1
        v = idx - starts[u] + u + 1
        return u, v

    def colored_edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All colored edges (u, v, color) in lexicographic order of (u, v)."""
        idx = np.flatnonzero(self.colors)
        u, v = self._decode(idx)
        return u, v, self.colors[idx].astype(np.int64)

    def color_class(self, i: int) -> list[tuple[int, int]]:
        idx = np.flatnonzero(self.colors == i)
        u, v = self._decode(idx)
        return list(zip(u.tolist(), v.tolist()))

    def degree(self, i: int) -> np.ndarray:
        u, v, c = self.colored_edges()
        sel = c == i
        return np.bincount(np.concatenate([u[sel], v[sel]]), minlength=self.N)

    def copy(self) -> "EdgeColoring":
        other = EdgeColoring.__new__(EdgeColoring)
        other.N, other.t, other.colors = self.N, self.t, self.colors.copy()
        return other


@dataclass(frozen=True)
class HostZones:
    """Partition of the host vertex set into main / hub / reserve / extra ranges."""

    main: range
    hub: range
    reserve: range
    extra: range

    @classmethod
    def build(cls, n: int, h: int, r: int, extra_vertex: bool) -> "HostZones":
        a = n - h - r
        if a < 0:
            raise ValueError(f"zones do not fit: n={n}, h={h}, reserve={r}")
        return cls(range(0, a), range(a, a + h), range(a + h, n), range(n, n + int(extra_vertex)))

    @property
    def N(self) -> int:
        return self.extra.stop

    def sizes(self) -> tuple[int, int, int, int]:
        return len(self.main), len(self.hub), len(self.reserve), len(self.extra)


def bfs_order(adj: Sequence[Sequence[int]], root: int) -> tuple[list[int], list[int]]:
    parent = {root: root}
    order = [root]
    q = deque([root])
    while q:
        u = q.popleft()
        for w in adj[u]:
            if w not in parent:
                parent[w] = u
                order.append(w)
                q.append(w)
    return order, [parent[v] for v in order]
