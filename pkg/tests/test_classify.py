import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from treepack.classify import (
    PATH_LIKE,
    TYPE_I,
    TYPE_II,
    ClassificationError,
    NotFoundError,
    Thresholds,
    check_certificate,
    classify,
    extract_bare_path,
    extract_spaced,
    greedy_leaf_cover,
    independent_leaves,
    leaf_parents,
)
from treepack.generate import broom, caterpillar, high_degree_tree, spider
from treepack.graph import Tree, random_prufer_tree


def thm2_thresholds(n, t=1):
    # closed-form values at n = 10^4: n^(1/4) = 10, n^(1/2) = 100, n^(3/4) = 1000
    return Thresholds(cover_size=round(n**0.25), leaf_count=round(n**0.5), high_degree=round(n**0.75),
                      bare_path_len=3 * t + 2, spaced_count=round(n**0.5))


def double_broom():
    # path 0..4 with six leaves on each end vertex
    edges = [(v, v + 1) for v in range(4)]
    edges += [(0, 5 + k) for k in range(6)] + [(4, 11 + k) for k in range(6)]
    return Tree.from_edges(17, edges)


def dist(t, a, b):
    seen = {a: 0}
    frontier = [a]
    while frontier:
        nxt = []
        for u in frontier:
            for w in t.adj[u]:
                if w not in seen:
                    seen[w] = seen[u] + 1
                    nxt.append(w)
        frontier = nxt
    return seen[b]


def test_independent_leaves_examples():
    assert len(independent_leaves(Tree.star(6))) == 1
    assert independent_leaves(Tree.path(7)) == [0, 6]
    sp = spider(15)
    tips = independent_leaves(sp)
    assert len(tips) == 7 and all(sp.deg[v] == 1 for v in tips)


def test_spider_independent_leaves_match_brute_force():
    sp = spider(15)
    leaves = sp.leaves()
    best = 0
    for r in range(len(leaves) + 1):
        for sub in itertools.combinations(leaves, r):
            parents = [sp.adj[v][0] for v in sub]
            if len(set(parents)) == len(parents):
                best = max(best, r)
    assert best == len(independent_leaves(sp)) == 7


def test_greedy_cover_examples():
    assert greedy_leaf_cover(Tree.star(10), 1) == ([0], 9)
    cover, covered = greedy_leaf_cover(Tree.path(10), 3)
    assert covered == 2 and set(cover) >= {1, 8}
    assert greedy_leaf_cover(double_broom(), 2) == ([0, 4], 12)


def test_greedy_cover_is_exact_on_double_broom():
    t = double_broom()
    lp = leaf_parents(t)
    best = max(sum(len(lp.get(v, ())) for v in pair) for pair in itertools.combinations(range(t.m), 2))
    assert best == 12


@given(st.integers(5, 60), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_greedy_cover_optimal(m, k, seed):
    t = random_prufer_tree(m, np.random.default_rng(seed))
    lp = leaf_parents(t)
    counts = sorted((len(v) for v in lp.values()), reverse=True)
    assert greedy_leaf_cover(t, k)[1] == sum(counts[:k])


def test_classify_examples():
    n = 10_000
    th = thm2_thresholds(n)
    star = classify(Tree.star(n), th)
    assert star.tag == TYPE_I and star.star
    assert classify(Tree.path(n), th).tag == PATH_LIKE
    rng = np.random.default_rng(0)
    # spine of 9880 with 120 pendants on distinct spine vertices
    cat = caterpillar(n, 120, rng)
    assert greedy_leaf_cover(cat, 10)[1] < 100
    assert classify(cat, th).tag == TYPE_II


def test_type_i_takes_precedence():
    # many leaves on one vertex and also many independent leaves
    base = caterpillar(400, 150, np.random.default_rng(1))
    edges = base.edges() + [(0, 400 + k) for k in range(150)]
    t = Tree.from_edges(550, edges)
    th = Thresholds(cover_size=5, leaf_count=120, high_degree=500, bare_path_len=5, spaced_count=10)
    assert len(independent_leaves(t)) >= 120
    assert classify(t, th).tag == TYPE_I


def test_path_like_without_certificate_raises():
    th = Thresholds(cover_size=2, leaf_count=50, high_degree=100, bare_path_len=20, spaced_count=5)
    with pytest.raises(ClassificationError):
        classify(spider(41), th)


def test_bare_path_examples():
    p = extract_bare_path(Tree.path(100), 10)
    assert len(p) == 10 and all(1 <= v <= 98 for v in p)
    with pytest.raises(NotFoundError):
        extract_bare_path(Tree.star(10), 2)
    b = broom(55, 5)
    w = extract_bare_path(b, 10)
    assert all(b.deg[v] == 2 for v in w)
    assert all(w[k + 1] in b.adj[w[k]] for k in range(9))


def test_spaced_examples():
    s = extract_spaced(Tree.path(100), 10)
    assert len(s) == 10
    with pytest.raises(NotFoundError):
        extract_spaced(Tree.path(5), 3)
    p = Tree.path(100)
    window = list(range(2, 14))
    s = extract_spaced(p, 30, forbidden=window)
    fb = set(window)
    for v in s:
        assert v not in fb and not any(w in fb for w in p.adj[v])
    for a, b in itertools.combinations(s, 2):
        assert dist(p, a, b) >= 2


def test_spaced_separation_three():
    p = Tree.path(60)
    s = extract_spaced(p, 15, separation=3)
    for a, b in itertools.combinations(s, 2):
        assert dist(p, a, b) >= 3


def _desk_thresholds(m):
    return Thresholds(cover_size=max(1, round(m ** 0.25)), leaf_count=max(2, round(m ** 0.5)),
                      high_degree=max(1, round(m ** 0.75)), bare_path_len=5, spaced_count=max(1, round(m ** 0.5) // 4))


def _check_random_trees(count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        m = int(rng.integers(50, 2001))
        t = random_prufer_tree(m, rng)
        th = _desk_thresholds(m)
        try:
            cls = classify(t, th)
        except ClassificationError:
            continue
        assert check_certificate(t, cls, th) == []


def test_certificates_self_verify():
    _check_random_trees(300, 11)


@pytest.mark.nightly
def test_certificates_self_verify_full():
    _check_random_trees(10_000, 12)


@given(st.integers(100, 1500), st.integers(0, 1), st.integers(0, 2**32 - 1))
def test_high_degree_trees_are_never_path_like(m, shape, seed):
    rng = np.random.default_rng(seed)
    c23 = math.ceil(m ** (2 / 3))
    deg = 2 * c23
    if deg >= m - 1:
        return
    t = high_degree_tree(m, rng, deg, shape)
    assert max(t.deg) >= deg
    th = Thresholds(cover_size=max(1, int(m ** (1 / 3))), leaf_count=int(m ** (2 / 3)),
                    high_degree=int(m ** (2 / 3)), bare_path_len=5, spaced_count=int(m ** 0.5))
    try:
        assert classify(t, th).tag in (TYPE_I, TYPE_II)
    except ClassificationError:
        pytest.fail("high-degree tree fell through to the path-like branch")
