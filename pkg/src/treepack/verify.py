"""Independent acceptance checks for a packing.

Only graph-core types are shared with the construction code: the verifier
reads the final coloring, rebuilds each color class as a tree and compares
canonical codes, so a construction bug cannot hide behind shared helpers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from treepack.graph import EdgeColoring, Tree, ahu_canonical
from treepack.instance import TreeFamily

WRONG_EDGE_COUNT = "wrong-edge-count"
NOT_A_TREE = "not-a-tree"
NOT_ISOMORPHIC = "not-isomorphic"
OVERLAP = "overlap"


@dataclass(frozen=True)
class Failure:
    color: int
    reason: str
    witness: object = None


@dataclass
class Verdict:
    failures: list[Failure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def reasons(self) -> set[str]:
        return {f.reason for f in self.failures}

    def lines(self) -> list[str]:
        return [f"color={f.color} reason={f.reason} witness={f.witness}" for f in self.failures]


def _class_tree(us: np.ndarray, vs: np.ndarray):
    """(Tree on relabeled vertices, None) or (None, witness) when the class is not a tree."""
    verts = np.unique(np.concatenate([us, vs]))
    if verts.size != us.size + 1:
        return None, {"vertices": int(verts.size), "edges": int(us.size)}
    index = {int(v): k for k, v in enumerate(verts.tolist())}
    parent = list(range(verts.size))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for a, b in zip(us.tolist(), vs.tolist()):
        ra, rb = find(index[a]), find(index[b])
        if ra == rb:
            return None, {"cycle_edge": (a, b)}
        parent[ra] = rb
        edges.append((index[a], index[b]))
    return Tree.from_edges(int(verts.size), edges), None


def verify(instance: TreeFamily, c: EdgeColoring) -> Verdict:
    if c.N != instance.N:
        raise ValueError(f"coloring is on {c.N} vertices, instance needs {instance.N}")
    verdict = Verdict()
    us, vs, cs = c.colored_edges()
    t = instance.t
    stray = np.flatnonzero((cs < 1) | (cs > t))
    if stray.size:
        k = int(stray[0])
        verdict.failures.append(Failure(int(cs[k]), OVERLAP, {"edge": (int(us[k]), int(vs[k])), "stray_edges": int(stray.size)}))
    counts = np.bincount(cs, minlength=t + 1)
    total = sum(tree.m - 1 for tree in instance.trees)
    if int(counts[1 : t + 1].sum()) != us.size - stray.size or us.size - stray.size > total:
        verdict.failures.append(Failure(0, OVERLAP, {"colored": int(us.size), "expected_total": total}))
    for i, tree in enumerate(instance.trees, start=1):
        sel = cs == i
        got = int(sel.sum())
        if got != tree.m - 1:
            verdict.failures.append(Failure(i, WRONG_EDGE_COUNT, {"edges": got, "expected": tree.m - 1}))
            continue
        if got == 0:
            continue
        cls_tree, witness = _class_tree(us[sel], vs[sel])
        if cls_tree is None:
            verdict.failures.append(Failure(i, NOT_A_TREE, witness))
            continue
        if ahu_canonical(cls_tree) != ahu_canonical(tree):
            degs = sorted(cls_tree.deg, reverse=True)[:5]
            verdict.failures.append(Failure(i, NOT_ISOMORPHIC, {"top_degrees": degs}))
    return verdict


def _expected_sizes(plan, n: int) -> dict[str, int]:
    i, t, h, r = plan.index, plan.t, plan.h, plan.hub_size
    before = plan.prior_type1 + plan.prior_pathlike
    sizes = {"hub_set": r, "forest_set": n - h - plan.reserve_size}
    if plan.mode == "thm1":
        if plan.tag == "TypeI":
            sizes["leaf_set"] = h - (i - 1)
            sizes["held"] = 0
        else:
            sizes["leaf_set"] = h - (t - 1) - (i - 1)
            sizes["held"] = t - 1
    elif plan.tag == "TypeI":
        s = 3 * t - before - 1
        sizes["star_leaves"] = s
        sizes["held"] = 2 * t
        sizes["leaf_set"] = h - s - 2 * t - 1 - (i - 1)
    elif plan.tag == "TypeII":
        sizes["held"] = 2 * t
        sizes["leaf_set"] = h - 2 * t - (i - 1)
    else:
        sizes["bare_path"] = 3 * t - before
        sizes["held"] = 8 * t
        sizes["held_nbrs"] = 16 * t
        sizes["leaf_set"] = h - (3 * t - before) - 8 * t - (i - 1)
    return sizes


def verify_claim_certificates(plans, instance: TreeFamily, coloring: EdgeColoring | None = None) -> Verdict:
    """Re-derive part sizes, disjointness and idle-vertex counts of each partition plan.

    With a coloring, idle hub and reserve vertices are counted from the color
    degrees rather than from the plan's own vertex map.
    """
    verdict = Verdict()
    for plan in plans:
        i = plan.index
        tree = instance.trees[i - 1]
        for name, want in _expected_sizes(plan, instance.n).items():
            got = len(getattr(plan, name))
            if got != want:
                verdict.failures.append(Failure(i, WRONG_EDGE_COUNT, {"part": name, "size": got, "expected": want}))
        parts = [plan.hub_set, plan.forest_set, plan.leaf_set, plan.held, plan.star_leaves, plan.bare_path]
        if plan.aux_leaf >= 0:
            parts.append([plan.aux_leaf])
        flat = [v for part in parts for v in part]
        if len(flat) != len(set(flat)):
            verdict.failures.append(Failure(i, OVERLAP, {"parts": "not disjoint"}))
        elif len(flat) != tree.m:
            verdict.failures.append(Failure(i, OVERLAP, {"covered": len(flat), "order": tree.m}))
        deg = tree.deg
        if any(deg[v] != 1 for v in plan.leaf_set) and plan.tag != "PathLike":
            verdict.failures.append(Failure(i, NOT_A_TREE, {"leaf_set": "contains a non-leaf"}))
        if coloring is None or plan.zones is None:
            continue
        z = plan.zones
        cdeg = coloring.degree(i)
        hub_idle = int(np.count_nonzero(cdeg[z.hub.start : z.hub.stop] == 0))
        res_idle = int(np.count_nonzero(cdeg[z.reserve.start : z.reserve.stop] == 0))
        star = 1 if plan.star else 0
        if plan.tag == "TypeI":
            ok = hub_idle + res_idle == i - 1 + star
        else:
            ok = hub_idle == i - 1 and res_idle == 0
        if not ok:
            verdict.failures.append(Failure(i, WRONG_EDGE_COUNT, {"hub_idle": hub_idle, "reserve_idle": res_idle}))
    return verdict
