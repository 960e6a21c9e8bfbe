"""Single-edge corruptions of a valid packing that can never be valid again."""

import numpy as np

from treepack.graph import EdgeColoring

DELETE, RECOLOR, ADD, CYCLE, COLLIDE = "delete", "recolor", "add", "cycle", "collide"
KINDS = (DELETE, RECOLOR, ADD, CYCLE, COLLIDE)


def _component_without(edges, u, v):
    """Vertices reachable from u in the class after removing edge {u, v}."""
    adj = {}
    for a, b in edges:
        if {a, b} == {u, v}:
            continue
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    seen, stack = {u}, [u]
    while stack:
        x = stack.pop()
        for y in adj.get(x, ()):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def mutate(coloring: EdgeColoring, t: int, kind: str, rng: np.random.Generator):
    """Return (edge list after mutation, color hit, expected reason or None for a write-once clash)."""
    us, vs, cs = coloring.colored_edges()
    edges = list(zip(us.tolist(), vs.tolist(), cs.tolist()))
    k = int(rng.integers(len(edges)))
    u, v, c = edges[k]
    N = coloring.N
    if kind == DELETE:
        return edges[:k] + edges[k + 1 :], c, "wrong-edge-count"
    if kind == RECOLOR:
        other = int(rng.choice([x for x in range(1, t + 1) if x != c]))
        return edges[:k] + [(u, v, other)] + edges[k + 1 :], c, "wrong-edge-count"
    if kind == ADD:
        while True:
            a, b = (int(x) for x in rng.integers(0, N, size=2))
            if a != b and coloring.get(a, b) == 0:
                return edges + [(min(a, b), max(a, b), c)], c, "wrong-edge-count"
    if kind == CYCLE:
        # move the far end of {u, v} onto u's own side: the class gains a cycle
        cls = [(a, b) for a, b, x in edges if x == c]
        side = sorted(_component_without(cls, u, v) - {u} - {b for a, b in cls if a == u} - {a for a, b in cls if b == u})
        free = [w for w in side if coloring.get(u, w) == 0]
        if not free:
            return None
        w = int(rng.choice(free))
        return edges[:k] + [(min(u, w), max(u, w), c)] + edges[k + 1 :], c, "not-a-tree"
    # COLLIDE: reuse an already colored pair
    j = int(rng.integers(len(edges)))
    a, b, _ = edges[j]
    return edges + [(a, b, c)], c, None


def rebuild(N: int, t: int, edges) -> EdgeColoring:
    col = EdgeColoring(N, max(t, 1))
    for a, b, c in edges:
        col.color_edge(a, b, c)
    return col
