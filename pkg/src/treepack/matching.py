"""Bipartite matching kernels.

``BipartiteAvail`` is the recurring "complete bipartite graph minus colored
edges" object: a boolean matrix over A x B. All searches scan B in ascending
index order, so results are reproducible.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class MatchingInfeasible(RuntimeError):
    """A matching promised by a Hall-type argument does not exist.

    ``witness`` is a set S of A-indices with |N(S)| < |S| - k (a defective
    Hall violator) and ``neighborhood`` is N(S).
    """

    def __init__(self, msg, witness=(), neighborhood=()):
        super().__init__(msg)
        self.witness = sorted(witness)
        self.neighborhood = sorted(neighborhood)


@dataclass
class BipartiteAvail:
    available: np.ndarray

    def __post_init__(self):
        self.available = np.asarray(self.available, dtype=bool)
        if self.available.ndim != 2:
            raise ValueError("availability must be a 2-d matrix")

    @property
    def a_size(self) -> int:
        return self.available.shape[0]

    @property
    def b_size(self) -> int:
        return self.available.shape[1]

    def neighbors(self) -> list[list[int]]:
        return [np.flatnonzero(row).tolist() for row in self.available]

    def contract_pairs(self, pairs: Sequence[tuple[int, int]]) -> "BipartiteAvail":
        """Quotient over A: merged vertex (a, a') sees b iff both a-b and a'-b are available."""
        av = self.available
        return BipartiteAvail(np.array([av[a] & av[b] for a, b in pairs]).reshape(len(pairs), self.b_size))

    @classmethod
    def complete(cls, a: int, b: int) -> "BipartiteAvail":
        return cls(np.ones((a, b), dtype=bool))


@dataclass
class StarDemand:
    centers: list[int]
    leaf_counts: list[int]


def _hopcroft_karp(adj: list[list[int]], b_size: int, match_a=None, match_b=None):
    a_size = len(adj)
    match_a = [-1] * a_size if match_a is None else list(match_a)
    match_b = [-1] * b_size if match_b is None else list(match_b)
    INF = 1 << 30
    while True:
        dist = [INF] * a_size
        q = deque()
        for a in range(a_size):
            if match_a[a] == -1:
                dist[a] = 0
                q.append(a)
        found = False
        while q:
            a = q.popleft()
            for b in adj[a]:
                a2 = match_b[b]
                if a2 == -1:
                    found = True
                elif dist[a2] == INF:
                    dist[a2] = dist[a] + 1
                    q.append(a2)
        if not found:
            break
        ptr = [0] * a_size
        for root in range(a_size):
            if match_a[root] != -1:
                continue
            # iterative layered DFS
            stack = [root]
            while stack:
                a = stack[-1]
                advanced = False
                while ptr[a] < len(adj[a]):
                    b = adj[a][ptr[a]]
                    ptr[a] += 1
                    a2 = match_b[b]
                    if a2 == -1:
                        # augment along the stack
                        for k in range(len(stack) - 1, -1, -1):
                            aa = stack[k]
                            nb = b
                            b = match_a[aa]
                            match_a[aa] = nb
                            match_b[nb] = aa
                        stack = []
                        advanced = True
                        break
                    if dist[a2] == dist[a] + 1:
                        stack.append(a2)
                        advanced = True
                        break
                if not advanced:
                    dist[a] = INF
                    stack.pop()
    return match_a, match_b


def _as_pairs(match_a) -> list[tuple[int, int]]:
    return [(a, b) for a, b in enumerate(match_a) if b != -1]


def max_matching(g: BipartiteAvail, initial: Sequence[tuple[int, int]] = ()) -> list[tuple[int, int]]:
    """Maximum matching by augmenting paths.

    Vertices matched in ``initial`` stay matched (augmentation never exposes a
    matched vertex), which callers use to favour a subset of B.
    """
    adj = g.neighbors()
    ma = [-1] * g.a_size
    mb = [-1] * g.b_size
    for a, b in initial:
        if not g.available[a, b] or ma[a] != -1 or mb[b] != -1:
            raise ValueError(f"initial pair ({a}, {b}) is not a matching edge")
        ma[a], mb[b] = b, a
    ma, _ = _hopcroft_karp(adj, g.b_size, ma, mb)
    return _as_pairs(ma)


def hall_witness(g: BipartiteAvail, matching: Sequence[tuple[int, int]]) -> tuple[list[int], list[int]]:
    """A-side set reachable by alternating paths from unmatched A vertices, and its neighbourhood.

    For a maximum matching, |S| - |N(S)| equals the number of unmatched A vertices.
    """
    adj = g.neighbors()
    match_a = {a: b for a, b in matching}
    match_b = {b: a for a, b in matching}
    S = {a for a in range(g.a_size) if a not in match_a}
    NS: set[int] = set()
    q = deque(S)
    while q:
        a = q.popleft()
        for b in adj[a]:
            if b in NS:
                continue
            NS.add(b)
            a2 = match_b.get(b)
            if a2 is not None and a2 not in S:
                S.add(a2)
                q.append(a2)
    return sorted(S), sorted(NS)


def matching_after_forests(g: BipartiteAvail, k: int) -> tuple[list[tuple[int, int]], list[int]]:
    """Matching covering at least a - k vertices of A; returns it with the uncovered A vertices."""
    if k == 0 and g.available.all():
        pairs = [(a, a) for a in range(min(g.a_size, g.b_size))]
    else:
        pairs = max_matching(g)
    if len(pairs) < g.a_size - k:
        S, NS = hall_witness(g, pairs)
        raise MatchingInfeasible(
            f"matching of size {len(pairs)} < a - k = {g.a_size - k}", S, NS
        )
    covered = {a for a, _ in pairs}
    return pairs, [a for a in range(g.a_size) if a not in covered]


def perfect_matching_after_matchings(g: BipartiteAvail, k: int) -> list[tuple[int, int]]:
    if g.a_size != g.b_size:
        raise ValueError("perfect matching needs equal class sizes")
    if k == 0 and g.available.all():
        return [(a, a) for a in range(g.a_size)]
    pairs = max_matching(g)
    if len(pairs) < g.a_size:
        S, NS = hall_witness(g, pairs)
        raise MatchingInfeasible(f"no perfect matching (size {len(pairs)} of {g.a_size})", S, NS)
    return pairs


def pack_star_forest(g: BipartiteAvail, d: StarDemand, k: int) -> dict[int, list[int]]:
    """Disjoint leaf sets in B, center ``d.centers[j]`` receiving exactly ``d.leaf_counts[j]``.

    Greedy in center order; if greedy strands a center (only possible when the
    degree hypothesis is violated) an exact b-matching on replicated centers
    takes over.
    """
    if len(d.centers) != len(d.leaf_counts):
        raise ValueError("centers and leaf_counts differ in length")
    if any(c < 0 for c in d.leaf_counts):
        raise ValueError("negative leaf count")
    used = np.zeros(g.b_size, dtype=bool)
    out: dict[int, list[int]] = {}
    for a, c in zip(d.centers, d.leaf_counts):
        if c == 0:
            continue
        free = np.flatnonzero(g.available[a] & ~used)
        if free.size < c:
            return _star_forest_exact(g, d)
        pick = free[:c]
        used[pick] = True
        out[a] = pick.tolist()
    return out


def _star_forest_exact(g: BipartiteAvail, d: StarDemand) -> dict[int, list[int]]:
    copies = [a for a, c in zip(d.centers, d.leaf_counts) for _ in range(c)]
    rep = BipartiteAvail(g.available[copies] if copies else np.zeros((0, g.b_size), bool))
    pairs = max_matching(rep)
    if len(pairs) < len(copies):
        S, NS = hall_witness(rep, pairs)
        raise MatchingInfeasible(
            f"star forest impossible: {len(pairs)} of {len(copies)} leaves placed",
            {copies[s] for s in S},
            NS,
        )
    out: dict[int, list[int]] = {}
    for s, b in sorted(pairs):
        out.setdefault(copies[s], []).append(b)
    return {a: sorted(bs) for a, bs in out.items()}
