"""End-to-end packers into K_n (high-degree trees, or star-free trees) and K_{n+1}.

Host layout: a main zone that receives the bulk forests, a hub zone split
into one block per tree plus spare room, a small reserve zone, and (for the
K_{n+1} packer) one extra vertex. Every tree is cut into a hub set, a forest
and a handful of small pieces; the forests are packed first, hub blocks are
wired to them, and the small pieces are finished by matching rounds.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from treepack.classify import (
    PATH_LIKE,
    TYPE_I,
    TYPE_II,
    ClassificationError,
    NotFoundError,
    Thresholds,
    TreeClass,
    classify,
    extract_spaced,
    leaf_parents,
    path_outer_neighbors,
)
from treepack.forest_embed import EmbedBudget, EmbedFailure, pack_forests
from treepack.graph import ColoringError, EdgeColoring, HostZones, Tree
from treepack.instance import TreeFamily
from treepack.matching import (
    BipartiteAvail,
    MatchingInfeasible,
    StarDemand,
    max_matching,
    pack_star_forest,
    perfect_matching_after_matchings,
)
from treepack.starpath import PATH, STAR, StarPathInfeasible, StarPathRequest, pack_stars_paths

log = logging.getLogger(__name__)

MODES = ("thm1", "thm2")
PACKED = "packed"
EMBED_FAILED = "embed_failed"
INFEASIBLE = "infeasible_profile"
COMPLETION_FAILED = "completion_failed"


class ProfileError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class PartitionError(RuntimeError):
    pass


class CompletionError(RuntimeError):
    pass


class AccountingError(CompletionError):
    pass


def iroot(x: int, k: int) -> int:
    """floor(x ** (1/k)) computed exactly."""
    if x < 0:
        raise ValueError("negative radicand")
    r = int(round(x ** (1.0 / k)))
    while r**k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class ScaleProfile:
    n: int
    mode: str
    t: int
    h: int
    hub_size: int
    reserve_size: int
    extra_vertex: bool
    thresholds: Thresholds
    strict: bool = False

    @property
    def main_size(self) -> int:
        return self.n - self.h - self.reserve_size

    def zones(self) -> HostZones:
        return HostZones.build(self.n, self.h, self.reserve_size, self.extra_vertex)

    def identity_gaps(self) -> dict[str, int]:
        """Deviation of the closed-form identities after flooring (0 = exact)."""
        n, t, h = self.n, self.t, self.h
        if self.mode == "thm1":
            return {"8t^2 = h - n^(2/3)/4": 8 * t * t - (h - iroot(n * n, 3) // 4)}
        return {"25t^2 = h/2": 2 * 25 * t * t - h}

    def inequalities(self) -> list[tuple[str, bool]]:
        n, t, h, r = self.n, self.t, self.h, self.reserve_size
        th = self.thresholds
        m = self.main_size
        if self.mode == "thm1":
            return [
                ("hub blocks fit: t*hub < h", t * self.hub_size < h),
                ("forest degree: high_degree < (n-h-reserve)/(3t)", 3 * t * th.high_degree < m),
                ("type II first round: h - 2t > 8t^2 + t", h - 2 * t > 8 * t * t + t),
                ("type II second round: h - t*hub > 4(t-1)^2", h - t * self.hub_size > 4 * (t - 1) ** 2),
                ("leaf supply: leaf_count >= h + hub", th.leaf_count >= h + self.hub_size),
            ]
        return [
            ("hub blocks and K_3t fit: t*hub + 3t <= h", t * self.hub_size + 3 * t <= h),
            ("forest degree: high_degree < (n-h-reserve)/(3t)", 3 * t * th.high_degree < m),
            ("type II round: h - hub > 4(t-1)^2", h - self.hub_size > 4 * (t - 1) ** 2),
            ("path-like round: h - hub - 3t >= 16(t-1)^2", h - self.hub_size - 3 * t >= 16 * (t - 1) ** 2),
            ("leaf supply: leaf_count >= h + hub", th.leaf_count >= h + self.hub_size),
        ]


_THRESHOLD_KEYS = ("cover_size", "leaf_count", "high_degree", "bare_path_len", "spaced_count")


def make_profile(n: int, mode: str, strict: bool = False, extra_vertex: bool | None = None, **overrides) -> ScaleProfile:
    """Profile from the closed-form defaults, optionally rescaled to a chosen ``t``.

    Passing ``t`` switches to the desk-scale formulas, which keep the
    block arithmetic of the defaults but derive h and the thresholds from t.
    Any other keyword overrides the matching field directly.
    """
    if n < 2:
        raise ProfileError("n must be at least 2")
    if mode not in MODES:
        raise ProfileError(f"unknown mode {mode!r}")
    unknown = set(overrides) - {"t", "h", "hub_size", "reserve_size", *_THRESHOLD_KEYS}
    if unknown:
        raise ProfileError(f"unknown overrides {sorted(unknown)}")
    if mode == "thm1":
        c13, c23 = iroot(n, 3), iroot(n * n, 3)
        if "t" in overrides:
            t = overrides["t"]
            h = 8 * t * t + c23 // 4
        else:
            t = c13 // 4
            h = 3 * c23 // 4
        hub = 8 * t
        m = n - h - hub
        high = min(c23, (m - 1) // (3 * t)) if t > 0 and "t" in overrides else c23
        th = dict(cover_size=max(c13, 1), leaf_count=max(c23, h + hub), high_degree=max(high, 1),
                  bare_path_len=3 * t + 2, spaced_count=max(iroot(n, 2), 1))
    else:
        c14, c12 = iroot(n, 4), iroot(n, 2)
        if "t" in overrides:
            t = overrides["t"]
            h = 50 * t * t
            hub = 25 * t
            th = dict(cover_size=10 * t, leaf_count=h + hub, high_degree=max((n - h - hub) // (3 * max(t, 1)), 1),
                      bare_path_len=3 * t + 2, spaced_count=h + 8 * t)
        else:
            t = c14 // 10
            h = c12 // 2
            hub = 25 * t
            th = dict(cover_size=max(c14, 1), leaf_count=max(c12, 1), high_degree=max(iroot(n**3, 4), 1),
                      bare_path_len=3 * t + 2, spaced_count=max(c12, 1))
    if t < 1:
        raise ProfileError(f"n={n} is too small: t = {t} < 1")
    h = overrides.get("h", h)
    hub_size = overrides.get("hub_size", hub)
    reserve = overrides.get("reserve_size", hub)
    for key in _THRESHOLD_KEYS:
        if key in overrides:
            th[key] = overrides[key]
    th["leaf_count"] = max(th["leaf_count"], th["cover_size"])
    try:
        thresholds = Thresholds(**th)
    except ValueError as exc:
        raise ProfileError(str(exc)) from exc
    if extra_vertex is None:
        extra_vertex = mode == "thm2"
    prof = ScaleProfile(n, mode, t, h, hub_size, reserve, extra_vertex, thresholds, strict)
    if prof.main_size < 1:
        raise ProfileError(f"zones do not fit: n={n}, h={h}, reserve={reserve}")
    need = t * hub_size + (3 * t if mode == "thm2" else 0)
    if need > h:
        raise ProfileError(f"hub blocks need {need} vertices but h = {h}")
    if strict:
        for name, ok in prof.inequalities():
            if not ok:
                raise ProfileError(f"strict profile violates {name}")
    return prof


# ---------------------------------------------------------------------------
# partition


@dataclass
class PartitionPlan:
    index: int
    tag: str
    mode: str
    star: bool = False
    hub_set: list[int] = field(default_factory=list)
    forest_set: list[int] = field(default_factory=list)
    leaf_set: list[int] = field(default_factory=list)
    held: list[int] = field(default_factory=list)
    held_nbrs: list[int] = field(default_factory=list)
    star_leaves: list[int] = field(default_factory=list)
    bare_path: list[int] = field(default_factory=list)
    path_anchors: tuple[int, ...] = ()
    center: int = -1
    aux_parent: int = -1
    aux_leaf: int = -1
    prior_type1: int = 0
    prior_type2: int = 0
    prior_pathlike: int = 0
    t: int = 0
    h: int = 0
    hub_size: int = 0
    reserve_size: int = 0
    high_degree: int = 0
    zones: HostZones | None = None
    hub_block: range | None = None
    image: list[int] | None = None

    def completion_nbrs(self, tree: Tree) -> list[int]:
        """Neighbours of the completion set (each a placed forest vertex)."""
        return sorted({w for v in self.leaf_set for w in tree.adj[v]})


def _pad(tree: Tree, core: set[int], exclude: set[int], size: int) -> list[int]:
    if len(core) > size:
        raise PartitionError(f"hub core has {len(core)} vertices, block size is {size}")
    deg = tree.deg
    out = set(core)
    for v in sorted(range(tree.m), key=lambda v: (-deg[v], v)):
        if len(out) == size:
            break
        if v not in out and v not in exclude:
            out.add(v)
    if len(out) < size:
        raise PartitionError("not enough vertices to fill the hub block")
    return sorted(out)


def partition_tree(
    tree: Tree, i: int, cls: TreeClass, profile: ScaleProfile, counters: tuple[int, int, int]
) -> PartitionPlan:
    """Cut T_i into hub set, forest and completion pieces.

    ``counters`` holds the numbers of type I, type II and path-like trees
    among T_1..T_{i-1}.
    """
    t1, t2, pl = counters
    t, h, r = profile.t, profile.h, profile.hub_size
    plan = PartitionPlan(i, cls.tag, profile.mode, star=cls.star, prior_type1=t1, prior_type2=t2,
                         prior_pathlike=pl, t=t, h=h, hub_size=r, reserve_size=profile.reserve_size,
                         high_degree=profile.thresholds.high_degree)
    deg = tree.deg
    high = {v for v in range(tree.m) if deg[v] > profile.thresholds.high_degree}
    lp = leaf_parents(tree)
    if profile.mode == "thm1":
        if cls.tag == TYPE_I:
            _thm1_type1(tree, i, cls, plan, high, lp)
        elif cls.tag == TYPE_II:
            _type2(tree, i, cls, plan, high, t - 1)
        else:
            raise PreconditionError(f"T_{i} is path-like; this packer needs type I or type II trees")
    else:
        if cls.tag == TYPE_I:
            _thm2_type1(tree, i, cls, plan, high, lp, counters)
        elif cls.tag == TYPE_II:
            _type2(tree, i, cls, plan, high, 2 * t)
        else:
            _pathlike(tree, i, plan, high, counters)
    placed = set(plan.hub_set) | set(plan.leaf_set) | set(plan.held) | set(plan.star_leaves) | set(plan.bare_path)
    if plan.aux_leaf >= 0:
        placed.add(plan.aux_leaf)
    plan.forest_set = [v for v in range(tree.m) if v not in placed]
    if len(plan.forest_set) != profile.main_size:
        raise PartitionError(
            f"T_{i}: forest has {len(plan.forest_set)} vertices, main zone has {profile.main_size}"
        )
    return plan


def _thm1_type1(tree, i, cls, plan, high, lp):
    core = set(cls.cover) | high
    need = plan.h - (i - 1)
    pool = sorted(v for c in core for v in lp.get(c, ()))
    if len(pool) < need:
        raise PartitionError(f"T_{i}: {len(pool)} leaves around the hub core, need {need}")
    plan.leaf_set = pool[:need]
    plan.hub_set = _pad(tree, core, set(plan.leaf_set), plan.hub_size)


def _type2(tree, i, cls, plan, high, held_count):
    indep = cls.independent
    parent = {v: tree.adj[v][0] for v in indep}
    # held leaves prefer parents that sit in the hub anyway
    ranked = sorted(indep, key=lambda v: (parent[v] not in high, v))
    held = sorted(ranked[:held_count])
    if len(held) < held_count:
        raise PartitionError(f"T_{i}: only {len(indep)} independent leaves")
    nbrs = sorted(parent[v] for v in held)
    core = set(nbrs) | high
    need = plan.h - held_count - (i - 1)
    held_set = set(held)
    pool = [v for v in indep if v not in held_set and parent[v] not in core and v not in core]
    if len(pool) < need:
        raise PartitionError(f"T_{i}: {len(pool)} independent leaves away from the hub, need {need}")
    plan.held, plan.held_nbrs = held, nbrs
    plan.leaf_set = pool[:need]
    exclude = held_set | set(plan.leaf_set) | {parent[v] for v in plan.leaf_set}
    plan.hub_set = _pad(tree, core, exclude, plan.hub_size)


def _thm2_type1(tree, i, cls, plan, high, lp, counters):
    t1, _, pl = counters
    t = plan.t
    x = min(cls.cover, key=lambda c: (-len(lp.get(c, ())), c))
    s_size = 3 * t - (t1 + pl) - 1
    mine = lp.get(x, [])
    want = s_size + 2 * t + (1 if cls.star else 0)
    if len(mine) < want:
        raise PartitionError(f"T_{i}: center has {len(mine)} leaves, need {want}")
    plan.center = x
    plan.star_leaves = mine[:s_size]
    plan.held = mine[s_size : s_size + 2 * t]
    plan.held_nbrs = [x] * (2 * t)
    core = {x} | set(cls.cover) | high
    if cls.star:
        plan.aux_leaf = mine[s_size + 2 * t]
    else:
        cands = [u for u in lp if u != x]
        if not cands:
            raise PartitionError(f"T_{i}: no leaf away from the center")
        u = min(cands, key=lambda u: (u not in core, -len(lp[u]), u))
        plan.aux_parent = u
        plan.aux_leaf = lp[u][0]
        core.add(u)
    taken = set(plan.star_leaves) | set(plan.held) | {plan.aux_leaf}
    need = plan.h - s_size - 2 * t - 1 - (i - 1)
    pool = sorted(v for c in core for v in lp.get(c, ()) if v not in taken)
    if len(pool) < need:
        raise PartitionError(f"T_{i}: {len(pool)} leaves around the hub core, need {need}")
    plan.leaf_set = pool[:need]
    plan.hub_set = _pad(tree, core, taken | set(plan.leaf_set), plan.hub_size)


def _pathlike(tree, i, plan, high, counters):
    t1, _, pl = counters
    t = plan.t
    plen = 3 * t - (t1 + pl)
    from treepack.classify import extract_bare_path

    try:
        path = extract_bare_path(tree, plen)
        o1, o2 = path_outer_neighbors(tree, path)
        fixed = set(path) | {o1, o2}
        held = extract_spaced(tree, 8 * t, forbidden=fixed, separation=3)
        nbrs = sorted(w for y in held for w in tree.adj[y])
        need = plan.h - plen - 8 * t - (i - 1)
        forbidden = fixed | set(held) | set(nbrs) | high
        leaves = extract_spaced(tree, need, forbidden=forbidden, separation=3)
    except NotFoundError as exc:
        raise PartitionError(f"T_{i}: {exc}") from exc
    plan.bare_path, plan.path_anchors = path, (o1, o2)
    plan.held, plan.held_nbrs = sorted(held), nbrs
    plan.leaf_set = sorted(leaves)
    core = {o1, o2} | set(nbrs) | high
    exclude = set(path) | set(held) | set(leaves) | {w for v in leaves for w in tree.adj[v]}
    plan.hub_set = _pad(tree, core, exclude, plan.hub_size)


# ---------------------------------------------------------------------------
# packing


@dataclass
class PackReport:
    outcome: str
    coloring: EdgeColoring | None
    plans: list[PartitionPlan]
    log: list[str] = field(default_factory=list)
    stage: str = ""
    diagnostic: str = ""
    attempts: int = 0
    extra_vertex_edges: int = 0
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def packed(self) -> bool:
        return self.outcome == PACKED


def _classify_all(instance: TreeFamily, profile: ScaleProfile) -> list[TreeClass]:
    out = []
    for i, tree in enumerate(instance.trees, start=1):
        try:
            out.append(classify(tree, profile.thresholds))
        except ClassificationError as exc:
            if profile.mode == "thm1":
                raise PreconditionError(f"T_{i} satisfies neither leaf condition") from exc
            raise
    return out


def check_preconditions(instance: TreeFamily, profile: ScaleProfile) -> None:
    if instance.n != profile.n:
        raise PreconditionError(f"instance n={instance.n} but profile n={profile.n}")
    if instance.t > profile.t:
        raise PreconditionError(f"{instance.t} trees but the profile has room for {profile.t}")
    if (instance.variant == "kn1") != profile.extra_vertex:
        raise PreconditionError(f"variant {instance.variant} does not match extra_vertex={profile.extra_vertex}")
    if profile.mode == "thm2" and not profile.extra_vertex:
        for i, tree in enumerate(instance.trees, start=1):
            if tree.is_star():
                raise PreconditionError(f"T_{i} is a star; it needs the extra host vertex")


def pack(instance: TreeFamily, profile: ScaleProfile, budget: EmbedBudget | None = None, retries: int = 5) -> PackReport:
    """Run the whole construction; the verifier decides whether the result counts."""
    from treepack.verify import verify

    budget = budget or EmbedBudget()
    check_preconditions(instance, profile)
    lines = [f"stage=start n={instance.n} t={instance.t} mode={profile.mode} variant={instance.variant}"]
    try:
        classes = _classify_all(instance, profile)
    except ClassificationError as exc:
        return PackReport(INFEASIBLE, None, [], lines, "classify", str(exc))
    if profile.mode == "thm1":
        for i, c in enumerate(classes, start=1):
            if c.tag == PATH_LIKE:
                raise PreconditionError(f"T_{i} is path-like; this packer needs type I or type II trees")
    plans = []
    counts = {TYPE_I: 0, TYPE_II: 0, PATH_LIKE: 0}
    try:
        for i, (tree, cls) in enumerate(zip(instance.trees, classes), start=1):
            plans.append(partition_tree(tree, i, cls, profile, (counts[TYPE_I], counts[TYPE_II], counts[PATH_LIKE])))
            counts[cls.tag] += 1
    except PartitionError as exc:
        return PackReport(INFEASIBLE, None, plans, lines, "partition", str(exc))
    lines.append("stage=classify " + " ".join(f"T{p.index}={p.tag}{'*' if p.star else ''}" for p in plans))
    outcome, stage, diag = EMBED_FAILED, "", ""
    for attempt in range(retries):
        b = dataclasses.replace(budget, rng_seed=budget.rng_seed + 7919 * attempt)
        run = _Run(instance, profile, plans, b, lines)
        try:
            run.execute()
        except EmbedFailure as exc:
            outcome, stage, diag = EMBED_FAILED, "forests", str(exc)
            lines.append(f"stage=forests attempt={attempt} status=failed reason=\"{exc}\"")
            continue
        except (MatchingInfeasible, CompletionError, StarPathInfeasible, ColoringError) as exc:
            outcome, stage, diag = COMPLETION_FAILED, run.stage, str(exc)
            lines.append(f"stage={run.stage} attempt={attempt} status=failed reason=\"{exc}\"")
            continue
        verdict = verify(instance, run.coloring)
        extra = run.extra_edges()
        lines.append(f"stage=verify ok={verdict.ok} failures={len(verdict.failures)} extra_vertex_edges={extra}")
        final = PACKED if verdict.ok else COMPLETION_FAILED
        return PackReport(final, run.coloring, plans, lines, "verify" if not verdict.ok else "",
                          "" if verdict.ok else str(verdict.failures[:3]), attempt + 1, extra, run.timings)
    return PackReport(outcome, None, plans, lines, stage, diag, retries)


def pack_prop(instance: TreeFamily, profile: ScaleProfile, budget: EmbedBudget | None = None, retries: int = 5) -> PackReport:
    """K_n packer for star-free families (the extra vertex is never needed)."""
    if instance.variant != "kn":
        raise PreconditionError("the star-free packer targets K_n (variant kn)")
    for i, tree in enumerate(instance.trees, start=1):
        if tree.is_star():
            raise PreconditionError(f"T_{i} is a star")
    if profile.mode != "thm2":
        raise PreconditionError("the star-free packer uses the thm2 scheme")
    if profile.extra_vertex:
        profile = dataclasses.replace(profile, extra_vertex=False)
    return pack(instance, profile, budget, retries)


class _Run:
    def __init__(self, instance: TreeFamily, profile: ScaleProfile, plans, budget: EmbedBudget, lines):
        self.inst = instance
        self.prof = profile
        self.plans = plans
        self.budget = budget
        self.lines = lines
        self.zones = profile.zones()
        self.coloring = EdgeColoring(self.zones.N, max(profile.t, 1))
        self.images = [[-1] * tree.m for tree in instance.trees]
        self.stage = ""
        self.timings: dict[str, float] = {}
        self.k3t: list[int] = []
        self.connector: dict[int, int] = {}
        hub0 = self.zones.hub.start
        r = profile.hub_size
        self.blocks = [range(hub0 + (i - 1) * r, hub0 + i * r) for i in range(1, instance.t + 1)]

    def _enter(self, name):
        self.stage = name
        self._t0 = time.perf_counter()

    def _leave(self, **info):
        dt = time.perf_counter() - self._t0
        self.timings[self.stage] = self.timings.get(self.stage, 0.0) + dt
        extra = " ".join(f"{k}={v}" for k, v in info.items())
        self.lines.append(f"stage={self.stage} seconds={dt:.4f} {extra}".rstrip())

    def extra_edges(self) -> int:
        if not len(self.zones.extra):
            return 0
        x = self.zones.extra.start
        return int(np.count_nonzero(self.coloring.row(x, np.arange(self.zones.N))))

    def _color(self, us, vs, i):
        self.coloring.color_edges(us, vs, i)

    def execute(self):
        main, hub, reserve, extra = self.zones.sizes()
        self.lines.append(f"stage=zones main={main} hub={hub} reserve={reserve} extra={extra}")
        self._forests()
        self._hubs()
        if self.prof.mode == "thm2":
            self._stars_paths()
        self._complete()
        self._account()

    # stage: forests
    def _forests(self):
        self._enter("forests")
        forests, orders = [], []
        for plan, tree in zip(self.plans, self.inst.trees):
            f, order = tree.induced_forest(plan.forest_set)
            forests.append(f)
            orders.append(order)
        rng = np.random.default_rng(self.budget.rng_seed)
        maps = pack_forests(forests, len(self.zones.main), self.budget, self.coloring, self.zones.main, rng=rng)
        for i, (order, mp) in enumerate(zip(orders, maps)):
            for v, host in zip(order, mp):
                self.images[i][v] = host
        self._leave(forests=len(forests))

    # stage: hubs
    def _hubs(self):
        self._enter("hubs")
        edges = 0
        for idx, (plan, tree) in enumerate(zip(self.plans, self.inst.trees)):
            i = idx + 1
            block = self.blocks[idx]
            img = self.images[idx]
            for v, host in zip(plan.hub_set, block):
                img[v] = host
            hub = set(plan.hub_set)
            forest = set(plan.forest_set)
            us, vs = [], []
            for u in plan.hub_set:
                for w in tree.adj[u]:
                    if (w in hub and u < w) or w in forest:
                        us.append(img[u])
                        vs.append(img[w])
            self._color(us, vs, i)
            edges += len(us)
            plan.zones = self.zones
            plan.hub_block = block
        self._leave(edges=edges)

    # stage: stars and paths (thm2)
    def _stars_paths(self):
        self._enter("stars_paths")
        t = self.prof.t
        items = [p for p in self.plans if p.tag in (TYPE_I, PATH_LIKE)]
        shapes = []
        for j, p in enumerate(items, start=1):
            if p.tag == TYPE_I:
                shapes.append((STAR, len(p.star_leaves) + 1))
            else:
                shapes.append((PATH, len(p.bare_path)))
        req = StarPathRequest(t, shapes)
        layout = pack_stars_paths(req, seed=self.budget.rng_seed)
        label_host = [-1] * (3 * t)
        for j, p in enumerate(items, start=1):
            if p.tag == TYPE_I:
                label_host[layout.stars[j][0]] = self.images[p.index - 1][p.center]
        spare = iter(range(self.zones.hub.start + t * self.prof.hub_size, self.zones.hub.stop))
        for lab in range(3 * t):
            if label_host[lab] == -1:
                label_host[lab] = next(spare)
        self.k3t = label_host
        used_hubs = set(range(self.zones.hub.start, self.zones.hub.start + t * self.prof.hub_size))
        self.hub_free = [w for w in self.zones.hub if w not in used_hubs and w not in set(label_host)]
        for j, p in enumerate(items, start=1):
            i = p.index
            img = self.images[i - 1]
            if p.tag == TYPE_I:
                c, leaves = layout.stars[j]
                for v, lab in zip(p.star_leaves, leaves):
                    img[v] = label_host[lab]
                hx = label_host[c]
                self._color([hx] * len(leaves), [label_host[lab] for lab in leaves], i)
            else:
                seq = [label_host[lab] for lab in layout.paths[j]]
                for v, host in zip(p.bare_path, seq):
                    img[v] = host
                o1, o2 = p.path_anchors
                self._color(seq[:-1] + [seq[0], seq[-1]], seq[1:] + [img[o1], img[o2]], i)
                self.connector[seq[0]] = img[o1]
                self.connector[seq[-1]] = img[o2]
        # the single pending leaf of each type I tree
        for p in items:
            if p.tag != TYPE_I:
                continue
            i = p.index
            img = self.images[i - 1]
            hx = img[p.center]
            if p.star:
                target = self.zones.extra.start
                src = hx
            else:
                src = img[p.aux_parent]
                target = self.connector.get(hx, self.hub_free[0])
            if self.coloring.get(src, target):
                raise CompletionError(f"T_{i}: edge for the pending leaf is already used")
            img[p.aux_leaf] = target
            self.coloring.color_edge(src, target, i)
        self._leave(items=len(items), engine=layout.engine)

    # stage: completion rounds
    def _complete(self):
        self._enter("complete")
        if self.prof.mode == "thm1":
            order = [TYPE_II, TYPE_I]
        else:
            order = [TYPE_II, PATH_LIKE, TYPE_I]
        for tag in order:
            for p in self.plans:
                if p.tag != tag:
                    continue
                if self.prof.mode == "thm1":
                    (self._thm1_type2 if tag == TYPE_II else self._star_round)(p)
                elif tag == TYPE_II:
                    self._thm2_type2(p)
                elif tag == PATH_LIKE:
                    self._thm2_pathlike(p)
                else:
                    self._star_round(p)
        self._leave()

    def _tree(self, p):
        return self.inst.trees[p.index - 1]

    def _attach(self, p, vertices, hosts):
        tree = self._tree(p)
        img = self.images[p.index - 1]
        us, vs = [], []
        for v, host in zip(vertices, hosts):
            img[v] = host
            for w in tree.adj[v]:
                us.append(img[w])
                vs.append(host)
        self._color(us, vs, p.index)

    def _units(self, p, vertices):
        tree = self._tree(p)
        img = self.images[p.index - 1]
        return [tuple(img[w] for w in tree.adj[v]) for v in vertices]

    def _thm1_type2(self, p):
        i = p.index
        reserve = list(self.zones.reserve)
        before = [w for b in self.blocks[: i - 1] for w in b]
        through = set(before) | set(self.blocks[i - 1])
        rest_pool = [w for w in self.zones.hub if w not in through]
        units = self._units(p, p.leaf_set)
        hosts = [-1] * len(units)
        if before:
            avail = _unit_avail(self.coloring, units, before)
            pairs = max_matching(BipartiteAvail(avail))
            need = len(before) - (i - 1)
            if len(pairs) < need:
                raise CompletionError(f"T_{i}: first round matched {len(pairs)}, need {need}")
            pairs.sort(key=lambda ab: before[ab[1]])
            for a, b in pairs[:need]:
                hosts[a] = before[b]
        open_idx = [a for a in range(len(units)) if hosts[a] == -1]
        n_hosts, y_hosts = _fill(self.coloring, [units[a] for a in open_idx], self._units(p, p.held),
                                 rest_pool, reserve, expected_unused=0, label=f"T_{i}")
        for a, host in zip(open_idx, n_hosts):
            hosts[a] = host
        self._attach(p, p.leaf_set, hosts)
        self._attach(p, p.held, y_hosts)

    def _thm2_type2(self, p):
        i = p.index
        block = set(self.blocks[i - 1])
        pool = [w for w in self.zones.hub if w not in block]
        blocked = {self.images[q.index - 1][q.center] for q in self.plans if q.tag == TYPE_I and q.index < i}
        mask = np.array([w not in blocked for w in pool], dtype=bool)
        n_hosts, y_hosts = _fill(self.coloring, self._units(p, p.leaf_set), self._units(p, p.held), pool,
                                 list(self.zones.reserve), expected_unused=i - 1, y_mask=mask, label=f"T_{i}")
        self._attach(p, p.leaf_set, n_hosts)
        self._attach(p, p.held, y_hosts)

    def _thm2_pathlike(self, p):
        i = p.index
        block = set(self.blocks[i - 1])
        k3t = set(self.k3t)
        pool = [w for w in self.zones.hub if w not in block and w not in k3t]
        n_hosts, y_hosts = _fill(self.coloring, self._units(p, p.leaf_set), self._units(p, p.held), pool,
                                 list(self.zones.reserve), expected_unused=p.prior_type2, label=f"T_{i}")
        self._attach(p, p.leaf_set, n_hosts)
        self._attach(p, p.held, y_hosts)

    def _star_round(self, p):
        """Finish a type I tree: every pending leaf hangs off a hub vertex."""
        i = p.index
        tree = self._tree(p)
        img = self.images[i - 1]
        block = set(self.blocks[i - 1])
        skip = set(self.k3t) if self.prof.mode == "thm2" else set()
        mine = set(img)
        targets = [w for w in list(self.zones.hub) + list(self.zones.reserve)
                   if w not in block and w not in skip and w not in mine]
        pending = sorted(set(p.leaf_set) | (set(p.held) if self.prof.mode == "thm2" else set()))
        by_center: dict[int, list[int]] = {}
        for v in pending:
            by_center.setdefault(tree.adj[v][0], []).append(v)
        centers = sorted(by_center, key=lambda c: (c != p.center, c))
        hosts_c = [img[c] for c in centers]
        avail = self.coloring.free_block(hosts_c, targets) if centers else np.zeros((0, len(targets)), bool)
        k = 2 * (self.prof.t - 1) if self.prof.mode == "thm2" else i - 1
        demand = StarDemand(list(range(len(centers))), [len(by_center[c]) for c in centers])
        assign = pack_star_forest(BipartiteAvail(avail), demand, k)
        verts, hosts = [], []
        for a, c in enumerate(centers):
            leaves = by_center[c]
            got = assign.get(a, [])
            if len(got) != len(leaves):
                raise CompletionError(f"T_{i}: star forest gave {len(got)} leaves to a center needing {len(leaves)}")
            verts.extend(leaves)
            hosts.extend(targets[b] for b in got)
        self._attach(p, verts, hosts)

    # stage: accounting
    def _account(self):
        self._enter("account")
        hub, reserve, extra = set(self.zones.hub), set(self.zones.reserve), set(self.zones.extra)
        for p, tree, img in zip(self.plans, self.inst.trees, self.images):
            i = p.index
            if -1 in img or len(set(img)) != tree.m:
                raise AccountingError(f"T_{i}: vertex map is not injective and total")
            used = set(img)
            hub_idle = len(hub - used)
            res_idle = len(reserve - used)
            if self.prof.mode == "thm1" and p.tag == TYPE_II or self.prof.mode == "thm2" and p.tag != TYPE_I:
                ok = hub_idle == i - 1 and res_idle == 0
                want = f"hub idle {i - 1}, reserve idle 0"
            else:
                star = 1 if p.star else 0
                ok = hub_idle + res_idle == i - 1 + star
                want = f"hub+reserve idle {i - 1 + star}"
            if not ok:
                raise AccountingError(f"T_{i} ({p.tag}): hub idle {hub_idle}, reserve idle {res_idle}; expected {want}")
            if extra and (p.star != bool(extra & used)):
                raise AccountingError(f"T_{i}: extra vertex use does not match the star flag")
            deg = self.coloring.degree(i)
            want_deg = np.zeros(self.zones.N, dtype=np.int64)
            want_deg[img] = tree.deg
            if not np.array_equal(deg, want_deg):
                bad = int(np.flatnonzero(deg != want_deg)[0])
                raise AccountingError(f"T_{i}: host {bad} has color degree {deg[bad]}, expected {want_deg[bad]}")
            p.image = list(img)
        self._leave()


def _unit_avail(col: EdgeColoring, units, cols) -> np.ndarray:
    if not units:
        return np.zeros((0, len(cols)), dtype=bool)
    anchors = np.asarray(units, dtype=np.int64)
    out = col.free_block(anchors[:, 0], cols)
    for j in range(1, anchors.shape[1]):
        out &= col.free_block(anchors[:, j], cols)
    return out


def _fill(col, units, y_units, pool, reserve, expected_unused, y_mask=None, label=""):
    """Place completion units into ``pool`` and ``reserve``.

    Every held unit goes into the pool; exactly ``len(reserve)`` ordinary
    units are left for a perfect matching into the reserve, and the rest go
    into the pool. Returns (host per unit, host per held unit).
    """
    target = len(units) - len(reserve)
    if len(pool) - target - len(y_units) != expected_unused or target < 0:
        raise AccountingError(
            f"{label}: pool {len(pool)}, units {len(units)}, held {len(y_units)}, reserve {len(reserve)} "
            f"leave {len(pool) - target - len(y_units)} idle, expected {expected_unused}"
        )
    navail = _unit_avail(col, units, pool)
    first = max_matching(BipartiteAvail(navail))
    yav = _unit_avail(col, y_units, pool)
    if y_mask is not None:
        yav &= y_mask[None, :]
    spare = np.ones(len(pool), dtype=bool)
    for _, b in first:
        spare[b] = False
    ym = max_matching(BipartiteAvail(yav & spare[None, :]))
    ym = max_matching(BipartiteAvail(yav), initial=ym)
    if len(ym) < len(y_units):
        raise CompletionError(f"{label}: only {len(ym)} of {len(y_units)} held vertices placed")
    ytaken = {b for _, b in ym}
    kept = [(a, b) for a, b in first if b not in ytaken]
    navail[:, sorted(ytaken)] = False
    pairs = max_matching(BipartiteAvail(navail), initial=kept)
    if len(pairs) < target:
        raise CompletionError(f"{label}: matched {len(pairs)} units into the hub, need {target}")
    pairs.sort(key=lambda ab: pool[ab[1]])
    pairs = pairs[:target]
    hosts = [-1] * len(units)
    for a, b in pairs:
        hosts[a] = pool[b]
    rest = [a for a in range(len(units)) if hosts[a] == -1]
    ravail = _unit_avail(col, [units[a] for a in rest], reserve)
    pm = perfect_matching_after_matchings(BipartiteAvail(ravail), 0)
    for a, b in pm:
        hosts[rest[a]] = reserve[b]
    y_hosts = [-1] * len(y_units)
    for a, b in ym:
        y_hosts[a] = pool[b]
    return hosts, y_hosts
