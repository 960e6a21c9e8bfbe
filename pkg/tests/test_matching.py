import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from treepack.matching import (
    BipartiteAvail,
    MatchingInfeasible,
    StarDemand,
    hall_witness,
    matching_after_forests,
    max_matching,
    pack_star_forest,
    perfect_matching_after_matchings,
)
from treepack.oracle import brute_max_matching, random_forest_removal, random_matching_removal


def is_matching(av, pairs):
    return (len({a for a, _ in pairs}) == len(pairs) == len({b for _, b in pairs})
            and all(av[a, b] for a, b in pairs))


def test_max_matching_examples():
    assert len(max_matching(BipartiteAvail.complete(3, 5))) == 3
    assert max_matching(BipartiteAvail(np.zeros((3, 4), bool))) == []


def test_random_eight_by_eight():
    rng = np.random.default_rng(20)
    av = np.zeros(64, bool)
    av[rng.choice(64, size=20, replace=False)] = True
    av = av.reshape(8, 8)
    pairs = max_matching(BipartiteAvail(av))
    assert is_matching(av, pairs)
    assert len(pairs) == brute_max_matching(av)


def test_max_matching_agrees_with_enumeration():
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        a, b = (int(x) for x in rng.integers(1, 8, size=2))
        edges = int(rng.integers(0, min(18, a * b) + 1))
        av = np.zeros(a * b, bool)
        av[rng.choice(a * b, size=edges, replace=False)] = True
        av = av.reshape(a, b)
        pairs = max_matching(BipartiteAvail(av))
        assert is_matching(av, pairs)
        assert len(pairs) == brute_max_matching(av)


def test_initial_vertices_stay_matched():
    av = np.ones((3, 3), bool)
    av[0, 1] = False
    pairs = max_matching(BipartiteAvail(av), initial=[(1, 0)])
    assert len(pairs) == 3
    assert any(b == 0 for _, b in pairs)


def test_hall_witness_deficiency():
    av = np.zeros((3, 3), bool)
    av[:, 0] = True
    pairs = max_matching(BipartiteAvail(av))
    S, NS = hall_witness(BipartiteAvail(av), pairs)
    assert len(S) - len(NS) == 3 - len(pairs)


def test_contract_pairs():
    av = np.array([[1, 1, 0], [0, 1, 1]], bool)
    q = BipartiteAvail(av).contract_pairs([(0, 1)])
    assert q.available.tolist() == [[False, True, False]]


def test_matching_after_forests_examples():
    pairs, missed = matching_after_forests(BipartiteAvail.complete(5, 10), 0)
    assert len(pairs) == 5 and missed == []
    # spanning double star: a_0 loses all of B but one, b_0 loses all of A
    av = np.ones((5, 20), bool)
    av[0, 1:] = False
    av[:, 0] = False
    av[0, 0] = True
    pairs, _ = matching_after_forests(BipartiteAvail(av), 1)
    assert len(pairs) >= 4 and len(pairs) == brute_max_matching(av)


def test_matching_after_random_spanning_tree():
    rng = np.random.default_rng(9)
    for _ in range(200):
        av = random_forest_removal(9, 30, 1, rng)
        assert av.sum() == 9 * 30 - 38
        pairs, _ = matching_after_forests(BipartiteAvail(av), 1)
        assert len(pairs) >= 8 and is_matching(av, pairs)


def test_matching_after_forests_reports_witness():
    av = np.zeros((4, 6), bool)
    av[:, 0] = True
    with pytest.raises(MatchingInfeasible) as err:
        matching_after_forests(BipartiteAvail(av), 1)
    assert len(err.value.witness) - len(err.value.neighborhood) >= 2


def test_perfect_matching_examples():
    assert perfect_matching_after_matchings(BipartiteAvail.complete(4, 4), 0) == [(a, a) for a in range(4)]
    av = np.ones((4, 4), bool)
    av[np.arange(4), np.arange(4)] = False
    av[np.arange(4), (np.arange(4) + 1) % 4] = False
    # exhaustive over all 4! candidates
    exists = any(all(av[a, p[a]] for a in range(4)) for p in itertools.permutations(range(4)))
    pm = perfect_matching_after_matchings(BipartiteAvail(av), 2)
    assert exists and len(pm) == 4 and is_matching(av, pm)


def test_perfect_matching_after_twelve_matchings():
    rng = np.random.default_rng(25)
    for _ in range(200):
        av = random_matching_removal(25, 12, rng)
        assert len(perfect_matching_after_matchings(BipartiteAvail(av), 12)) == 25


def test_perfect_matching_needs_square():
    with pytest.raises(ValueError):
        perfect_matching_after_matchings(BipartiteAvail.complete(2, 3), 0)


def test_star_forest_examples():
    got = pack_star_forest(BipartiteAvail.complete(1, 5), StarDemand([0], [3]), 0)
    assert len(got[0]) == 3
    av = np.ones((2, 5), bool)
    av[0, 0] = av[1, 1] = False
    got = pack_star_forest(BipartiteAvail(av), StarDemand([0, 1], [2, 2]), 1)
    assert len(got[0]) == len(got[1]) == 2 and not set(got[0]) & set(got[1])
    assert all(av[c, x] for c in got for x in got[c])
    assert pack_star_forest(BipartiteAvail.complete(3, 4), StarDemand([0, 1, 2], [0, 0, 0]), 0) == {}


def test_star_forest_falls_back_to_exact_search():
    # greedy in order would give center 0 the only vertex center 1 can use
    av = np.array([[1, 1], [1, 0]], bool)
    got = pack_star_forest(BipartiteAvail(av), StarDemand([0, 1], [1, 1]), 0)
    assert got == {0: [1], 1: [0]}
    with pytest.raises(MatchingInfeasible):
        pack_star_forest(BipartiteAvail(av), StarDemand([0, 1], [2, 1]), 0)


@given(st.integers(1, 6), st.integers(2, 12), st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_star_forest_within_hypothesis(a, b, k, seed):
    k = min(k, b - 1)
    rng = np.random.default_rng(seed)
    av = np.ones((a, b), bool)
    for row in range(a):
        av[row, rng.choice(b, size=int(rng.integers(k + 1)), replace=False)] = False
    cuts = np.sort(rng.integers(0, b - k + 1, size=a - 1))
    counts = np.diff(np.concatenate([[0], cuts, [b - k]])).tolist()
    got = pack_star_forest(BipartiteAvail(av), StarDemand(list(range(a)), counts), k)
    used = [x for v in got.values() for x in v]
    assert len(used) == len(set(used)) == b - k
    assert all(len(got.get(c, [])) == counts[c] for c in range(a))
