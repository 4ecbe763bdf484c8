"""Shared fixtures and independent brute-force oracles."""

import math

import numpy as np
import pytest

from flowcomm.model import StreamlineSet, _from_polylines


# ---- independent distance oracles (plain python, no numpy vector paths) ----

def oracle_shortest(P, Q):
    return min(math.dist(p, q) for p in P for q in Q)


def oracle_average(P, Q):
    total = 0.0
    for p in P:
        for q in Q:
            total += math.dist(p, q)
    return total / (len(P) * len(Q))


def oracle_longest(P, Q):
    h_pq = max(min(math.dist(p, q) for q in Q) for p in P)
    h_qp = max(min(math.dist(p, q) for p in P) for q in Q)
    return max(h_pq, h_qp)


ORACLES = {"shortest": oracle_shortest, "average": oracle_average,
           "longest": oracle_longest}


def random_set(rng, n_lines=10, min_pts=3, max_pts=8, scale=10.0) -> StreamlineSet:
    lines = []
    for _ in range(n_lines):
        n = int(rng.integers(min_pts, max_pts + 1))
        start = rng.uniform(-scale, scale, 3)
        steps = rng.uniform(-1.0, 1.0, (n - 1, 3))
        lines.append(np.concatenate(([start], start + np.cumsum(steps, axis=0))))
    return _from_polylines(lines)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def two_triangles_graph():
    """Two disjoint unit-weight triangles as an undirected Csng."""
    from flowcomm.graph import Csng
    edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
    src, dst = [], []
    for a, b in edges:
        src += [a, b]
        dst += [b, a]
    order = np.lexsort((dst, src))
    src, dst = np.asarray(src)[order], np.asarray(dst)[order]
    indptr = np.zeros(7, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return Csng("segment", 6, indptr, dst.astype(np.int32),
                np.ones(12, dtype=np.float32), np.ones(12, dtype=np.float32), False)


def make_csng(n, undirected_edges, weights=None, distances=None, level="segment",
              directed=False):
    """Small Csng from an edge list (stored symmetric unless directed)."""
    from flowcomm.graph import Csng
    src, dst, w, d = [], [], [], []
    for idx, (a, b) in enumerate(undirected_edges):
        wt = 1.0 if weights is None else weights[idx]
        dt = 1.0 if distances is None else distances[idx]
        src.append(a); dst.append(b); w.append(wt); d.append(dt)
        if not directed:
            src.append(b); dst.append(a); w.append(wt); d.append(dt)
    src, dst = np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)
    w, d = np.asarray(w), np.asarray(d)
    order = np.lexsort((dst, src))
    src, dst, w, d = src[order], dst[order], w[order], d[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return Csng(level, n, indptr, dst.astype(np.int32), w.astype(np.float32),
                d.astype(np.float32), directed)
