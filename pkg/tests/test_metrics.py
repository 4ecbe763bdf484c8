import itertools

import numpy as np
import pytest

from flowcomm import metrics as mt
from flowcomm.community import Partition
from flowcomm.errors import LengthMismatch, LevelMismatch

from conftest import make_csng


def part(assignment, level="segment"):
    a = np.asarray(assignment, dtype=np.int32)
    return Partition(level, a, int(a.max()) + 1, 0.0)


def oracle_weighted_jaccard(pred, truth):
    """Best-match enumeration straight from the definition."""
    pred, truth = np.asarray(pred), np.asarray(truth)
    total = 0.0
    for c in np.unique(pred):
        members = set(np.nonzero(pred == c)[0].tolist())
        best = 0.0
        for v in np.unique(truth):
            cls = set(np.nonzero(truth == v)[0].tolist())
            j = len(members & cls) / len(members | cls)
            best = max(best, j)
        total += len(members) * best
    return total / len(pred)


class TestJaccard:
    def test_basic(self):
        assert mt.jaccard({1, 2}, {2, 3}) == pytest.approx(1 / 3)

    def test_both_empty(self):
        assert mt.jaccard(set(), set()) == 1.0

    def test_disjoint(self):
        assert mt.jaccard({1}, {2}) == 0.0


class TestWeightedJaccard:
    def test_relabeling_gives_one(self):
        truth = [0, 0, 1, 1, 2, 2]
        assert mt.weighted_jaccard(part([2, 2, 0, 0, 1, 1]), truth) == 1.0

    def test_worked_example(self):
        # {e1,e2},{e3,e4} against truth {e1,e2,e3},{e4}
        got = mt.weighted_jaccard(part([0, 0, 1, 1]), [0, 0, 0, 1])
        assert got == pytest.approx(7 / 12)

    def test_single_community_vs_m_classes(self):
        for m in (2, 3, 5):
            truth = np.repeat(np.arange(m), 4)
            got = mt.weighted_jaccard(part(np.zeros(4 * m, int)), truth)
            assert got == pytest.approx(1 / m)

    def test_matches_enumeration_oracle(self, rng):
        for _ in range(30):
            n = int(rng.integers(4, 20))
            pred = rng.integers(0, 4, n)
            pred = part(np.unique(pred, return_inverse=True)[1])
            truth = rng.integers(0, 3, n)
            assert mt.weighted_jaccard(pred, truth) == pytest.approx(
                oracle_weighted_jaccard(pred.assignment, truth), abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            mt.weighted_jaccard(part([0, 1]), [0, 1, 2])

    def test_bounded_unit_interval(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 15))
            pred = part(np.unique(rng.integers(0, 5, n), return_inverse=True)[1])
            truth = rng.integers(0, 5, n)
            assert 0.0 < mt.weighted_jaccard(pred, truth) <= 1.0


class TestCommunityStats:
    def test_two_triangles(self, two_triangles_graph):
        p = part([0, 0, 0, 1, 1, 1])
        stats = mt.community_stats(two_triangles_graph, p)
        for s in stats:
            assert s.size == 3
            assert s.internal_edges == 3
            assert s.external_edges == 0
            assert s.isolation == 0.0
            assert s.internal_density == 1.0
            assert s.mean_neighbor_distance == 1.0

    def test_cross_edges_counted_once_per_side(self):
        # path 0-1-2 split into {0,1} and {2}
        g = make_csng(3, [(0, 1), (1, 2)], distances=[2.0, 4.0])
        stats = mt.community_stats(g, part([0, 0, 1]))
        assert stats[0].internal_edges == 1
        assert stats[0].external_edges == 1
        assert stats[0].isolation == 0.5
        assert stats[0].mean_neighbor_distance == 2.0
        assert stats[1].size == 1
        assert stats[1].internal_density == 0.0
        assert stats[1].isolation == 1.0

    def test_brute_force_counts(self, rng):
        for _ in range(15):
            n = int(rng.integers(4, 12))
            edges = [(i, j) for i, j in itertools.combinations(range(n), 2)
                     if rng.random() < 0.4]
            if not edges:
                continue
            d = rng.uniform(0.5, 3, len(edges))
            g = make_csng(n, edges, distances=d)
            a = np.unique(rng.integers(0, 3, n), return_inverse=True)[1]
            stats = mt.community_stats(g, part(a))
            for s in stats:
                ints = [k for k, (x, y) in enumerate(edges)
                        if a[x] == a[y] == s.community_id]
                exts = [k for k, (x, y) in enumerate(edges)
                        if (a[x] == s.community_id) != (a[y] == s.community_id)]
                assert s.internal_edges == len(ints)
                assert s.external_edges == len(exts)
                if ints:
                    assert s.mean_neighbor_distance == pytest.approx(
                        float(np.mean([d[k] for k in ints])), rel=1e-6)

    def test_partition_must_cover(self, two_triangles_graph):
        with pytest.raises(LevelMismatch):
            mt.community_stats(two_triangles_graph, part([0, 1]))


class TestFilter:
    def _stats(self):
        return [
            mt.CommunityStats(0, 40, 100, 1, 1 / 101, 0.2, 3.0),
            mt.CommunityStats(1, 40, 50, 40, 40 / 90, 0.1, 9.0),
            mt.CommunityStats(2, 3, 3, 5, 5 / 8, 1.0, 1.0),
            mt.CommunityStats(3, 10, 9, 9, 0.5, 0.2, 2.0),
        ]

    def test_large_isolated(self):
        got = mt.filter_communities(self._stats(), "large_isolated")
        assert got == {0}

    def test_large_dispersed(self):
        got = mt.filter_communities(self._stats(), "large_dispersed")
        assert got == {1}

    def test_small_connected(self):
        got = mt.filter_communities(self._stats(), "small_connected")
        assert got == {2}

    def test_custom_predicate(self):
        got = mt.filter_communities(self._stats(), lambda s: s.size == 10)
        assert got == {3}

    def test_explicit_thresholds(self):
        got = mt.filter_communities(self._stats(), "large_isolated",
                                    size_hi=5, isolation_lo=0.7)
        assert got == {0, 1, 2, 3} - {2} or got == {0, 1, 3}

    def test_empty_stats(self):
        assert mt.filter_communities([], "large_isolated") == set()

    def test_unknown_template(self):
        with pytest.raises(ValueError):
            mt.filter_communities(self._stats(), "mystery")
