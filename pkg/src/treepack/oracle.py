"""Reference solvers for tiny instances.

``exact_pack`` is a plain backtracking search used to check that every
shape sequence packs at tiny n. The matching references here are written
independently of ``treepack.matching`` so the claim grids compare two
separate implementations.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from treepack.graph import EdgeColoring, Tree, ahu_canonical

PACKED = "packed"
UNSAT = "unsat"
TIMEOUT = "timeout"


@dataclass
class SearchStats:
    nodes: int = 0
    max_depth: int = 0
    elapsed: float = 0.0
    outcome: str = ""
    exhausted: bool = False

    def line(self) -> str:
        return (f"outcome={self.outcome} nodes={self.nodes} max_depth={self.max_depth} "
                f"elapsed={self.elapsed:.3f} exhausted={self.exhausted}")


def _bfs(tree: Tree) -> tuple[list[int], list[int]]:
    root = max(range(tree.m), key=lambda v: (len(tree.adj[v]), -v))
    order, parent = [root], [-1]
    seen = {root}
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        for w in tree.adj[u]:
            if w not in seen:
                seen.add(w)
                order.append(w)
                parent.append(u)
    return order, parent


def exact_pack(trees, N: int, time_limit: float | None = None) -> tuple[EdgeColoring | None, SearchStats]:
    """Edge-disjoint copies of ``trees`` in K_N, color i+1 for ``trees[i]``.

    Trees are placed largest first, vertex by vertex in BFS order; the first
    tree's root is pinned to host vertex 0. Returns (coloring, stats) or
    (None, stats) with outcome unsat (search exhausted) or timeout.
    """
    stats = SearchStats()
    t0 = time.perf_counter()
    trees = list(trees)
    if sum(tr.m - 1 for tr in trees) > N * (N - 1) // 2 or any(tr.m > N for tr in trees):
        stats.outcome, stats.exhausted = UNSAT, True
        return None, stats
    order = sorted(range(len(trees)), key=lambda k: -trees[k].m)
    steps = []  # (tree slot, vertex, parent)
    for slot, k in enumerate(order):
        vs, ps = _bfs(trees[k])
        steps += [(slot, v, p) for v, p in zip(vs, ps)]
    images = [[-1] * trees[k].m for k in order]
    occupied = [0] * len(order)
    used = [0] * N  # bitmask of colored host edges at each vertex
    deadline = None if time_limit is None else t0 + time_limit

    placed = [-1] * len(steps)

    def candidates(depth):
        slot, v, p = steps[depth]
        if p == -1:
            return [0] if slot == 0 else list(range(N))
        busy = used[images[slot][p]] | occupied[slot]
        return [w for w in range(N) if not busy >> w & 1]

    def put(depth, w):
        slot, v, p = steps[depth]
        images[slot][v] = w
        occupied[slot] |= 1 << w
        if p != -1:
            a = images[slot][p]
            used[a] |= 1 << w
            used[w] |= 1 << a
        placed[depth] = w

    def take_back(depth):
        slot, v, p = steps[depth]
        w = placed[depth]
        if p != -1:
            a = images[slot][p]
            used[a] &= ~(1 << w)
            used[w] &= ~(1 << a)
        occupied[slot] &= ~(1 << w)
        images[slot][v] = -1
        placed[depth] = -1

    # explicit stack of candidate iterators, one per placed vertex
    pending = []
    found = False
    while True:
        depth = len(pending)
        if depth == len(steps):
            found = True
            break
        stats.nodes += 1
        stats.max_depth = max(stats.max_depth, depth)
        if deadline is not None and stats.nodes & 1023 == 0 and time.perf_counter() > deadline:
            stats.outcome = TIMEOUT
            stats.elapsed = time.perf_counter() - t0
            return None, stats
        pending.append(iter(candidates(depth)))
        while pending:
            d = len(pending) - 1
            if placed[d] != -1:
                take_back(d)
            w = next(pending[-1], None)
            if w is None:
                pending.pop()
                continue
            put(d, w)
            break
        if not pending:
            break
    stats.elapsed = time.perf_counter() - t0
    if not found:
        stats.outcome, stats.exhausted = UNSAT, True
        return None, stats
    col = EdgeColoring(N, max(len(trees), 1))
    for slot, k in enumerate(order):
        img = images[slot]
        edges = trees[k].edges()
        if edges:
            col.color_edges([img[a] for a, _ in edges], [img[b] for _, b in edges], k + 1)
    stats.outcome = PACKED
    return col, stats


# ---------------------------------------------------------------------------
# tree shapes


@lru_cache(maxsize=None)
def _shapes(m: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    if m == 1:
        return ((),)
    if m == 2:
        return (((0, 1),),)
    seen: dict[bytes, tuple] = {}
    for edges in _shapes(m - 1):
        for v in range(m - 1):
            grown = tuple(edges) + ((v, m - 1),)
            code = ahu_canonical(Tree.from_edges(m, grown))
            seen.setdefault(code, grown)
    return tuple(seen[c] for c in sorted(seen))


def nonisomorphic_trees(m: int) -> list[Tree]:
    """One representative per isomorphism class of trees on m vertices."""
    if m < 1:
        raise ValueError("m must be positive")
    return [Tree.from_edges(m, e) for e in _shapes(m)]


def tpc_sequences(n: int):
    """Every shape sequence T_n, T_{n-1}, ..., T_2."""
    return itertools.product(*(nonisomorphic_trees(m) for m in range(n, 1, -1)))


def automorphism_count(tree: Tree) -> int:
    """|Aut(T)| by trying every vertex permutation (tiny trees only)."""
    edges = {frozenset(e) for e in tree.edges()}
    count = 0
    for perm in itertools.permutations(range(tree.m)):
        if all(frozenset((perm[a], perm[b])) in edges for a, b in tree.edges()):
            count += 1
    return count


# ---------------------------------------------------------------------------
# reference matchings


def brute_max_matching(available: np.ndarray) -> int:
    """Maximum matching size by exhaustive search over B-subsets (small graphs only)."""
    av = np.asarray(available, dtype=bool)
    rows = [np.flatnonzero(r).tolist() for r in av]

    @lru_cache(maxsize=None)
    def best(a, used):
        if a == len(rows):
            return 0
        out = best(a + 1, used)
        for b in rows[a]:
            if not used >> b & 1:
                out = max(out, 1 + best(a + 1, used | 1 << b))
        return out

    return best(0, 0)


def _kuhn_owner(rows: list[list[int]], width: int) -> list[int]:
    owner = [-1] * width

    def augment(a, seen):
        for b in rows[a]:
            if b in seen:
                continue
            seen.add(b)
            if owner[b] == -1 or augment(owner[b], seen):
                owner[b] = a
                return True
        return False

    for a in range(len(rows)):
        augment(a, set())
    return owner


def kuhn_max_matching(available: np.ndarray) -> int:
    """Maximum matching size by simple augmenting paths (independent reference)."""
    av = np.asarray(available, dtype=bool)
    owner = _kuhn_owner([np.flatnonzero(r).tolist() for r in av], av.shape[1])
    return sum(o >= 0 for o in owner)


def random_forest_removal(a: int, b: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Availability of K_{a,b} after deleting k edge-disjoint random spanning forests."""
    av = np.ones((a, b), dtype=bool)
    for _ in range(k):
        parent = list(range(a + b))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        cells = np.argwhere(av)
        for idx in rng.permutation(len(cells)):
            u, w = (int(x) for x in cells[idx])
            ru, rw = find(u), find(a + w)
            if ru != rw:
                parent[ru] = rw
                av[u, w] = False
    return av


def random_matching_removal(a: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Availability of K_{a,a} after deleting k edge-disjoint random perfect matchings.

    What is left after j deletions is (a-j)-regular, so a perfect matching of
    it always exists; scanning neighbours in random order randomizes which.
    """
    if k > a:
        raise ValueError(f"K_{{{a},{a}}} has only {a} disjoint perfect matchings")
    av = np.ones((a, a), dtype=bool)
    for _ in range(k):
        rows = [rng.permutation(np.flatnonzero(r)).tolist() for r in av]
        owner = _kuhn_owner(rows, a)
        av[owner, np.arange(a)] = False
    return av


# ---------------------------------------------------------------------------
# claim grids


@dataclass
class GridReport:
    claim: str
    cells: int = 0
    trials: int = 0
    discrepancies: list[str] = field(default_factory=list)
    out_of_hypothesis: int = 0
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.discrepancies

    def line(self) -> str:
        return (f"claim={self.claim} cells={self.cells} trials={self.trials} "
                f"discrepancies={len(self.discrepancies)} out_of_hypothesis={self.out_of_hypothesis} "
                f"elapsed={self.elapsed:.2f}")


def _check_pairs(av, pairs) -> str | None:
    a_seen, b_seen = set(), set()
    for a, b in pairs:
        if not av[a, b]:
            return f"pair ({a}, {b}) uses a removed edge"
        if a in a_seen or b in b_seen:
            return "pairs do not form a matching"
        a_seen.add(a)
        b_seen.add(b)
    return None


def _grid_matching(rep, trials, rng, max_a=10, max_b=14, ks=(1, 2)):
    from treepack.matching import BipartiteAvail, MatchingInfeasible, matching_after_forests

    for k in ks:
        for a in range(4 * k * k + 1, max_a + 1):
            for b in range(a + k + 1, max_b + 1):
                rep.cells += 1
                for _ in range(trials):
                    rep.trials += 1
                    av = random_forest_removal(a, b, k, rng)
                    try:
                        pairs, _ = matching_after_forests(BipartiteAvail(av), k)
                    except MatchingInfeasible as exc:
                        rep.discrepancies.append(f"a={a} b={b} k={k}: {exc}")
                        continue
                    bad = _check_pairs(av, pairs)
                    if bad or len(pairs) < a - k or len(pairs) != kuhn_max_matching(av):
                        rep.discrepancies.append(f"a={a} b={b} k={k}: size {len(pairs)} {bad or ''}")


def _grid_matching2(rep, trials, rng, max_a=12):
    from treepack.matching import BipartiteAvail, MatchingInfeasible, perfect_matching_after_matchings

    for a in range(1, max_a + 1):
        for k in range(0, a // 2 + 1):
            rep.cells += 1
            for _ in range(trials):
                rep.trials += 1
                av = random_matching_removal(a, k, rng)
                try:
                    pairs = perfect_matching_after_matchings(BipartiteAvail(av), k)
                except MatchingInfeasible as exc:
                    rep.discrepancies.append(f"a={a} k={k}: {exc}")
                    continue
                bad = _check_pairs(av, pairs)
                if bad or len(pairs) != a:
                    rep.discrepancies.append(f"a={a} k={k}: size {len(pairs)} {bad or ''}")
    # out-of-hypothesis probe: k+1 matchings with a = 2k may fail, but only loudly
    for k in range(1, max_a // 2 + 1):
        a = 2 * k
        for _ in range(trials):
            av = random_matching_removal(a, k + 1, rng)
            try:
                pairs = perfect_matching_after_matchings(BipartiteAvail(av), k)
            except MatchingInfeasible:
                rep.out_of_hypothesis += 1
                continue
            if _check_pairs(av, pairs) or len(pairs) != a:
                rep.discrepancies.append(f"probe a={a} k={k}: silent undersized matching")


def _grid_stars(rep, trials, rng, max_a=6, max_b=12, max_k=3):
    from treepack.matching import BipartiteAvail, MatchingInfeasible, StarDemand, pack_star_forest

    for a in range(1, max_a + 1):
        for b in range(1, max_b + 1):
            for k in range(0, min(max_k, b - 1) + 1):
                rep.cells += 1
                for _ in range(trials):
                    rep.trials += 1
                    av = np.ones((a, b), dtype=bool)
                    for row in range(a):
                        miss = int(rng.integers(k + 1))
                        av[row, rng.choice(b, size=miss, replace=False)] = False
                    # demands on the boundary sum b - k
                    cuts = np.sort(rng.integers(0, b - k + 1, size=a - 1))
                    counts = np.diff(np.concatenate([[0], cuts, [b - k]])).tolist()
                    try:
                        got = pack_star_forest(BipartiteAvail(av), StarDemand(list(range(a)), counts), k)
                    except MatchingInfeasible as exc:
                        rep.discrepancies.append(f"a={a} b={b} k={k}: {exc}")
                        continue
                    leaves = [x for ls in got.values() for x in ls]
                    ok = len(leaves) == len(set(leaves)) and all(
                        len(got.get(c, [])) == counts[c] and all(av[c, x] for x in got.get(c, []))
                        for c in range(a)
                    )
                    if not ok:
                        rep.discrepancies.append(f"a={a} b={b} k={k}: invalid assignment {got} for {counts}")


def _grid_starspaths(rep, trials, rng, max_k=6):
    from treepack.starpath import PATH, STAR, StarPathInfeasible, StarPathRequest, pack_stars_paths, verify_layout

    for k in range(1, max_k + 1):
        for length in range(1, k + 1):
            for kinds in itertools.product((STAR, PATH), repeat=length):
                rep.cells += 1
                stars = [j for j, kind in enumerate(kinds, start=1) if kind == STAR]
                for trial in range(max(1, trials)):
                    rep.trials += 1
                    pins = {}
                    if trial:
                        spots = rng.choice(3 * k, size=len(stars), replace=False).tolist()
                        pins = dict(zip(stars, spots))
                    req = StarPathRequest.from_kinds(k, kinds, pins)
                    try:
                        layout = pack_stars_paths(req, seed=trial)
                    except StarPathInfeasible as exc:
                        rep.discrepancies.append(f"k={k} {kinds} pins={pins}: {exc}")
                        continue
                    problems = verify_layout(req, layout)
                    for j, pin in pins.items():
                        if layout.stars[j][0] != pin:
                            problems.append(f"item {j} center off its pin")
                    if problems:
                        rep.discrepancies.append(f"k={k} {kinds} pins={pins}: {problems}")


CLAIMS = ("stars", "matching", "matching2", "starspaths")


def claim_grid(claim: str, trials: int = 100, seed: int = 0, **bounds) -> GridReport:
    """Run one claim over its parameter grid and report discrepancies.

    For ``starspaths`` every kind pattern with up to k items is tried once
    unpinned and ``trials - 1`` times with random center pins.
    """
    if claim not in CLAIMS:
        raise ValueError(f"unknown claim {claim!r}")
    rng = np.random.default_rng(seed)
    rep = GridReport(claim)
    t0 = time.perf_counter()
    {"matching": _grid_matching, "matching2": _grid_matching2, "stars": _grid_stars,
     "starspaths": _grid_starspaths}[claim](rep, trials, rng, **bounds)
    rep.elapsed = time.perf_counter() - t0
    return rep
