import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowcomm import graph as gr
from flowcomm.errors import LevelMismatch
from flowcomm.neighbors import NeighborQueryConfig, default_rbn_radius

from conftest import make_csng, random_set


def dense_from(g):
    """Dense weight matrix, independent of the CSR walk in the module."""
    W = np.zeros((g.n_nodes, g.n_nodes))
    for i in range(g.n_nodes):
        lo, hi = g.indptr[i], g.indptr[i + 1]
        for j, w in zip(g.indices[lo:hi], g.weights[lo:hi]):
            W[i, j] += w
    return W


class TestBuild:
    def test_knn_out_degree_and_direction(self, rng):
        sset = random_set(rng, n_lines=10)
        g = gr.build_csng(sset, "segment", NeighborQueryConfig("knn", k=5))
        assert g.directed
        assert np.all(g.degrees() == 5)
        assert np.all(g.weights == 1.0)

    def test_rbn_stored_symmetric(self, rng):
        sset = random_set(rng, n_lines=10)
        g = gr.build_csng(
            sset, "segment",
            NeighborQueryConfig("rbn", radius=default_rbn_radius(sset)))
        assert not g.directed
        W = dense_from(g)
        np.testing.assert_array_equal(W, W.T)

    def test_indices_sorted_per_node(self, rng):
        sset = random_set(rng, n_lines=8)
        for cfg in (NeighborQueryConfig("knn", k=4),
                    NeighborQueryConfig("rbn", radius=default_rbn_radius(sset))):
            g = gr.build_csng(sset, "segment", cfg)
            for i in range(g.n_nodes):
                nbrs = g.neighbors(i)
                assert np.all(np.diff(nbrs) > 0)
                assert i not in nbrs

    def test_edge_distances_match_direct_queries(self, rng):
        from flowcomm.neighbors import build_kdtree, query_neighbors
        sset = random_set(rng, n_lines=6)
        cfg = NeighborQueryConfig("knn", k=3)
        g = gr.build_csng(sset, "segment", cfg)
        tree = build_kdtree(sset, "segment")
        for i in range(min(g.n_nodes, 20)):
            nl = query_neighbors(tree, sset, i, cfg)
            lo, hi = g.indptr[i], g.indptr[i + 1]
            by_id = dict(zip(nl.ids.tolist(), nl.distances.tolist()))
            for j, d in zip(g.indices[lo:hi], g.distances[lo:hi]):
                assert d == pytest.approx(by_id[int(j)], rel=1e-6)


class TestSymmetrize:
    def test_union_max_weight_min_distance(self):
        # directed: 0->1 (w=2, d=5) and 1->0 (w=3, d=1), plus 0->2 only
        g = make_csng(3, [(0, 1), (1, 0), (0, 2)], weights=[2, 3, 1],
                      distances=[5, 1, 7], directed=True)
        s = gr.symmetrize(g)
        assert not s.directed
        W = dense_from(s)
        assert W[0, 1] == 3 and W[1, 0] == 3
        assert W[0, 2] == 1 and W[2, 0] == 1
        d01 = s.distances[np.searchsorted(s.indices[s.indptr[0]:s.indptr[1]], 1)
                          + s.indptr[0]]
        assert d01 == 1.0

    def test_idempotent_on_undirected(self, two_triangles_graph):
        assert gr.symmetrize(two_triangles_graph) is two_triangles_graph

    @given(seed=st.integers(0, 100))
    @settings(max_examples=20, deadline=None)
    def test_result_always_symmetric(self, seed):
        r = np.random.default_rng(seed)
        n = int(r.integers(3, 10))
        m = int(r.integers(1, 15))
        edges = [(int(a), int(b)) for a, b in r.integers(0, n, (m, 2)) if a != b]
        if not edges:
            return
        g = make_csng(n, edges, weights=r.uniform(0.1, 2, len(edges)),
                      distances=r.uniform(0.1, 2, len(edges)), directed=True)
        W = dense_from(gr.symmetrize(g))
        np.testing.assert_array_equal(W, W.T)


class TestAggregate:
    def oracle(self, g, sset):
        """Dense double-loop aggregation straight from the definition."""
        sg = gr.symmetrize(g)
        W = dense_from(sg)
        n = sset.n_streamlines
        counts = np.diff(sset.seg_offsets)
        R = np.zeros((n, n))
        for i in range(sg.n_nodes):
            for j in range(sg.n_nodes):
                a, b = sset.seg_line[i], sset.seg_line[j]
                if a != b:
                    R[a, b] += W[i, j]
        sums = R.copy()
        for a in range(n):
            for b in range(n):
                if R[a, b]:
                    R[a, b] /= counts[a] * counts[b]
        return R, sums

    def test_matches_dense_oracle(self, rng):
        sset = random_set(rng, n_lines=8, scale=3.0)
        g = gr.build_csng(sset, "segment", NeighborQueryConfig("knn", k=6))
        agg = gr.aggregate_to_streamlines(g, sset)
        R, sums = self.oracle(g, sset)
        np.testing.assert_allclose(dense_from(agg), R, atol=1e-12)
        # raw sums conserve cross-edge mass exactly
        assert agg.source_weight_sums.sum() == sums.sum()

    def test_mass_conservation_exact(self, rng):
        sset = random_set(rng, n_lines=12, scale=3.0)
        g = gr.build_csng(sset, "segment", NeighborQueryConfig("knn", k=4))
        sg = gr.symmetrize(g)
        cross = sset.seg_line[np.repeat(np.arange(sg.n_nodes), np.diff(sg.indptr))] \
            != sset.seg_line[sg.indices]
        expected = float(sg.weights.astype(np.float64)[cross].sum())
        agg = gr.aggregate_to_streamlines(g, sset)
        assert float(agg.source_weight_sums.sum()) == expected

    def test_rejects_non_segment_graph(self, rng):
        sset = random_set(rng, n_lines=4)
        g = gr.build_csng(sset, "streamline", NeighborQueryConfig("knn", k=2))
        with pytest.raises(LevelMismatch):
            gr.aggregate_to_streamlines(g, sset)


class TestSubgraph:
    def test_induced_edges_only(self, two_triangles_graph):
        sub, ids = gr.subgraph(two_triangles_graph, np.array([0, 1, 3, 4]))
        assert ids.tolist() == [0, 1, 3, 4]
        W = dense_from(sub)
        expected = np.zeros((4, 4))
        expected[0, 1] = expected[1, 0] = 1  # 0-1
        expected[2, 3] = expected[3, 2] = 1  # 3-4
        np.testing.assert_array_equal(W, expected)

    def test_full_selection_is_identity(self, two_triangles_graph):
        sub, _ = gr.subgraph(two_triangles_graph, np.arange(6))
        np.testing.assert_array_equal(dense_from(sub),
                                      dense_from(two_triangles_graph))


class TestStats:
    def test_two_triangles(self, two_triangles_graph):
        s = gr.graph_stats(two_triangles_graph)
        assert s["n_nodes"] == 6
        assert s["n_edges"] == 6
        assert s["total_weight"] == 6.0
        assert s["degree_min"] == s["degree_max"] == 2


class TestIo:
    def test_roundtrip(self, rng, tmp_path):
        sset = random_set(rng, n_lines=6)
        g = gr.build_csng(sset, "segment", NeighborQueryConfig("knn", k=3))
        p = tmp_path / "g.csng"
        gr.write_csng(g, p)
        h = gr.read_csng(p)
        assert h.level == g.level and h.directed == g.directed
        assert h.n_nodes == g.n_nodes
        np.testing.assert_array_equal(h.indptr, g.indptr)
        np.testing.assert_array_equal(h.indices, g.indices)
        np.testing.assert_array_equal(h.weights, g.weights)
        np.testing.assert_array_equal(h.distances, g.distances)

    def test_bytes_deterministic(self, rng, tmp_path):
        sset = random_set(rng, n_lines=6)
        g = gr.build_csng(sset, "segment", NeighborQueryConfig("knn", k=3))
        a, b = tmp_path / "a.csng", tmp_path / "b.csng"
        gr.write_csng(g, a)
        gr.write_csng(g, b)
        assert a.read_bytes() == b.read_bytes()

    def test_rejects_garbage(self, tmp_path):
        from flowcomm.errors import MalformedInput
        p = tmp_path / "bad.csng"
        p.write_bytes(b"NOPE" + b"\x00" * 40)
        with pytest.raises(MalformedInput):
            gr.read_csng(p)
