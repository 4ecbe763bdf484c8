"""Curve segment neighborhood graph: compressed storage and aggregation.

Graphs are stored as CSR-style arrays (indptr / indices / weights /
distances) with per-node neighbor lists sorted ascending by id, so two
builds from identical inputs are bit-identical regardless of thread count.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import LevelMismatch, MalformedInput
from .model import LEVELS, StreamlineSet, SubCurve
from .neighbors import NeighborQueryConfig, build_kdtree, query_all

_LEVEL_CODE = {lvl: i for i, lvl in enumerate(LEVELS)}
_MAGIC = b"CSNG"
_VERSION = 1


@dataclass
class Csng:
    level: str
    n_nodes: int
    indptr: np.ndarray     # (n+1,) int64
    indices: np.ndarray    # (m,) int32, sorted ascending per node
    weights: np.ndarray    # (m,) float32
    distances: np.ndarray  # (m,) float32
    directed: bool
    config: NeighborQueryConfig | None = None
    # set by aggregate_to_streamlines: raw cross-segment edge-weight sums
    source_weight_sums: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_edges(self) -> int:
        """Stored directed arc count (undirected edges appear twice)."""
        return len(self.indices)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def weighted_degrees(self) -> np.ndarray:
        src = np.repeat(np.arange(self.n_nodes), np.diff(self.indptr))
        return np.bincount(src, weights=self.weights.astype(np.float64),
                           minlength=self.n_nodes)

    def total_weight(self) -> float:
        """W: total edge weight (each undirected edge counted once)."""
        s = float(self.weights.astype(np.float64).sum())
        return s if self.directed else s / 2.0


def _from_edge_arrays(level, n_nodes, src, dst, w, d, directed, config=None):
    """Assemble CSR arrays from parallel edge arrays, sorted by (src, dst)."""
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    w, d = w[order], d[order]
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return Csng(level, n_nodes, indptr, dst.astype(np.int32),
                w.astype(np.float32), d.astype(np.float32), directed, config)


def build_csng(sset: StreamlineSet, level: str, config: NeighborQueryConfig,
               subcurves: list[SubCurve] | None = None,
               threads: int | None = None) -> Csng:
    """One node per element; edges from exact neighbor queries, weight 1.

    kNN graphs are stored directed; RBN graphs are stored symmetric (the
    relation is symmetric because all measures are).
    """
    tree = build_kdtree(sset, level, subcurves)
    lists = query_all(tree, sset, config, threads)
    srcs, dsts, dists = [], [], []
    for nl in lists:
        srcs.append(np.full(len(nl.ids), nl.query_id, dtype=np.int64))
        dsts.append(nl.ids.astype(np.int64))
        dists.append(nl.distances)
    src = np.concatenate(srcs) if srcs else np.empty(0, dtype=np.int64)
    dst = np.concatenate(dsts) if dsts else np.empty(0, dtype=np.int64)
    dist = np.concatenate(dists) if dists else np.empty(0)
    n = tree.n_elements
    if config.strategy == "rbn":
        # union both directions so stored symmetry is exact even under
        # floating-point asymmetries at the radius boundary
        src, dst, dist, w = _symmetrize_edges(n, src, dst, dist, np.ones(len(src)))
        directed = False
    else:
        directed = True
        w = np.ones(len(src))
    return _from_edge_arrays(level, n, src, dst, w, dist, directed, config)


def _symmetrize_edges(n, src, dst, dist, weights):
    """Union of both directions; weight = max, distance = min per pair."""
    s2 = np.concatenate((src, dst))
    d2 = np.concatenate((dst, src))
    w2 = np.concatenate((weights, weights))
    x2 = np.concatenate((dist, dist))
    order = np.lexsort((d2, s2))
    s2, d2, w2, x2 = s2[order], d2[order], w2[order], x2[order]
    key = s2 * n + d2
    first = np.concatenate(([True], key[1:] != key[:-1]))
    groups = np.cumsum(first) - 1
    n_groups = int(groups[-1]) + 1 if len(groups) else 0
    w_out = np.full(n_groups, -np.inf)
    x_out = np.full(n_groups, np.inf)
    np.maximum.at(w_out, groups, w2)
    np.minimum.at(x_out, groups, x2)
    return s2[first], d2[first], x_out, w_out


def symmetrize(g: Csng) -> Csng:
    """Undirected version: edge if either direction existed, w = max, d = min."""
    if not g.directed:
        return g
    src = np.repeat(np.arange(g.n_nodes, dtype=np.int64), np.diff(g.indptr))
    dst = g.indices.astype(np.int64)
    s, d, x, w = _symmetrize_edges(g.n_nodes, src, dst,
                                   g.distances.astype(np.float64),
                                   g.weights.astype(np.float64))
    return _from_edge_arrays(g.level, g.n_nodes, s, d, w, x, False, g.config)


def aggregate_to_streamlines(g: Csng, sset: StreamlineSet) -> Csng:
    """Streamline relationship graph: R = cross-edge weight / (|S_a| * |S_b|).

    Uses the symmetrized segment weights; within-streamline edges are
    irrelevant to cross pairs and are dropped.
    """
    if g.level != "segment":
        raise LevelMismatch("aggregation requires a segment-level CSNG")
    sg = symmetrize(g)
    src = np.repeat(np.arange(sg.n_nodes, dtype=np.int64), np.diff(sg.indptr))
    dst = sg.indices.astype(np.int64)
    ls, ld = sset.seg_line[src], sset.seg_line[dst]
    cross = ls != ld
    ls, ld = ls[cross], ld[cross]
    w = sg.weights.astype(np.float64)[cross]
    d = sg.distances.astype(np.float64)[cross]
    n = sset.n_streamlines
    key = ls * n + ld
    order = np.argsort(key, kind="stable")
    key, ls, ld, w, d = key[order], ls[order], ld[order], w[order], d[order]
    first = np.concatenate(([True], key[1:] != key[:-1])) if len(key) else np.empty(0, bool)
    groups = (np.cumsum(first) - 1) if len(key) else np.empty(0, dtype=np.int64)
    n_groups = int(groups[-1]) + 1 if len(groups) else 0
    w_sum = np.zeros(n_groups)
    d_min = np.full(n_groups, np.inf)
    np.add.at(w_sum, groups, w)
    np.minimum.at(d_min, groups, d)
    ls, ld = ls[first], ld[first]
    seg_counts = np.diff(sset.seg_offsets).astype(np.float64)
    r = w_sum / (seg_counts[ls] * seg_counts[ld])
    out = _from_edge_arrays("streamline", n, ls, ld, r, d_min, False, g.config)
    # keep raw sums alongside R so mass-conservation checks are exact
    reorder = np.lexsort((ld, ls))
    out.source_weight_sums = w_sum[reorder]
    return out


def subgraph(g: Csng, node_ids: np.ndarray) -> tuple[Csng, np.ndarray]:
    """Induced subgraph over ``node_ids``; returns (graph, original ids)."""
    node_ids = np.unique(np.asarray(node_ids, dtype=np.int64))
    remap = np.full(g.n_nodes, -1, dtype=np.int64)
    remap[node_ids] = np.arange(len(node_ids))
    src = np.repeat(np.arange(g.n_nodes, dtype=np.int64), np.diff(g.indptr))
    dst = g.indices.astype(np.int64)
    keep = (remap[src] >= 0) & (remap[dst] >= 0)
    sub = _from_edge_arrays(g.level, len(node_ids), remap[src[keep]], remap[dst[keep]],
                            g.weights.astype(np.float64)[keep],
                            g.distances.astype(np.float64)[keep],
                            g.directed, g.config)
    return sub, node_ids


def graph_stats(g: Csng) -> dict:
    deg = g.degrees()
    wdeg = g.weighted_degrees()
    return {
        "n_nodes": g.n_nodes,
        "n_edges": g.n_edges if g.directed else g.n_edges // 2,
        "directed": g.directed,
        "total_weight": g.total_weight(),
        "degree_min": int(deg.min()) if len(deg) else 0,
        "degree_max": int(deg.max()) if len(deg) else 0,
        "degree_mean": float(deg.mean()) if len(deg) else 0.0,
        "weighted_degree_mean": float(wdeg.mean()) if len(wdeg) else 0.0,
    }


def write_csng(g: Csng, path) -> None:
    """Binary export: little-endian header + CSR arrays."""
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<IBBxx", _VERSION, _LEVEL_CODE[g.level], int(g.directed)))
        f.write(struct.pack("<QQ", g.n_nodes, len(g.indices)))
        f.write(g.indptr.astype("<i8").tobytes())
        f.write(g.indices.astype("<i4").tobytes())
        f.write(g.weights.astype("<f4").tobytes())
        f.write(g.distances.astype("<f4").tobytes())


def read_csng(path) -> Csng:
    with open(path, "rb") as f:
        if f.read(4) != _MAGIC:
            raise MalformedInput("not a CSNG file")
        version, level_code, directed = struct.unpack("<IBBxx", f.read(8))
        if version != _VERSION:
            raise MalformedInput(f"unsupported CSNG version {version}")
        n_nodes, n_edges = struct.unpack("<QQ", f.read(16))
        indptr = np.frombuffer(f.read(8 * (n_nodes + 1)), dtype="<i8")
        indices = np.frombuffer(f.read(4 * n_edges), dtype="<i4")
        weights = np.frombuffer(f.read(4 * n_edges), dtype="<f4")
        distances = np.frombuffer(f.read(4 * n_edges), dtype="<f4")
    return Csng(LEVELS[level_code], int(n_nodes), indptr.copy(), indices.copy(),
                weights.copy(), distances.copy(), bool(directed))
