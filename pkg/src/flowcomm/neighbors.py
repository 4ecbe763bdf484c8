"""KD-tree accelerated exact kNN / radius neighbor queries between elements.

Elements (segments, sub-curves, streamlines) are compared through point-set
proximity measures.  The KD-tree only proposes candidates; every candidate is
re-scored with the exact measure and the pool is grown until the result is
provably complete, so the output matches a brute-force scan bit for bit.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .errors import EmptyDataset, InvalidConfig, InvalidId, LevelMismatch
from .model import StreamlineSet, SubCurve

MEASURES = ("shortest", "average", "longest")


@dataclass(frozen=True)
class NeighborQueryConfig:
    strategy: str                 # 'knn' | 'rbn'
    k: int | None = None
    radius: float | None = None
    measure: str = "longest"

    def __post_init__(self):
        if self.strategy not in ("knn", "rbn"):
            raise InvalidConfig(f"unknown strategy {self.strategy!r}")
        if self.measure not in MEASURES:
            raise InvalidConfig(f"unknown measure {self.measure!r}")
        if self.strategy == "knn":
            if self.k is None or self.k < 1:
                raise InvalidConfig("knn requires k >= 1")
        else:
            if self.radius is None or not np.isfinite(self.radius) or self.radius <= 0:
                raise InvalidConfig("rbn requires radius > 0")


@dataclass
class NeighborList:
    query_id: int
    ids: np.ndarray        # ascending by (distance, id)
    distances: np.ndarray


def point_set_distance(P: np.ndarray, Q: np.ndarray, measure: str) -> float:
    """Proximity between two point sets: min / mean / symmetric Hausdorff."""
    D = cdist(P, Q)
    if measure == "shortest":
        return float(D.min())
    if measure == "average":
        return float(D.mean())
    if measure == "longest":
        return float(max(D.min(axis=1).max(), D.min(axis=0).max()))
    raise InvalidConfig(f"unknown measure {measure!r}")


def segment_distance(a: np.ndarray, b: np.ndarray, measure: str) -> float:
    """Measure between two segments given as (2, 3) endpoint arrays."""
    return point_set_distance(np.asarray(a, dtype=np.float64),
                              np.asarray(b, dtype=np.float64), measure)


def curve_distance(a_points: np.ndarray, b_points: np.ndarray, measure: str) -> float:
    """Measure between two polyline point sets (sub-curve or streamline)."""
    return point_set_distance(np.asarray(a_points, dtype=np.float64),
                              np.asarray(b_points, dtype=np.float64), measure)


@dataclass
class ElementKdTree:
    """Spatial index over element representative points.

    Segment level indexes midpoints (with per-segment spread = half length);
    curve levels index every sample point tagged with its owning element.
    """

    level: str
    n_elements: int
    tree: cKDTree
    owner: np.ndarray | None          # per tree point, curve levels only
    spread: np.ndarray | None         # per element, segment level only
    max_spread: float
    subcurves: list[SubCurve] | None = None


def build_kdtree(sset: StreamlineSet, level: str,
                 subcurves: list[SubCurve] | None = None) -> ElementKdTree:
    if sset.n_segments == 0:
        raise EmptyDataset("cannot index an empty dataset")
    if level == "segment":
        mids = sset.segment_midpoints()
        spread = 0.5 * sset.segment_lengths()
        return ElementKdTree(level, sset.n_segments, cKDTree(mids), None,
                             spread, float(spread.max()))
    if level in ("streamline", "subcurve"):
        n = sset.n_elements(level, subcurves)
        pts, owners = [], []
        for eid in range(n):
            p = sset.element_points(level, eid, subcurves)
            pts.append(p)
            owners.append(np.full(len(p), eid, dtype=np.int64))
        return ElementKdTree(level, n, cKDTree(np.concatenate(pts)),
                             np.concatenate(owners), None, 0.0,
                             subcurves=subcurves)
    raise LevelMismatch(f"unknown level {level!r}")


def _segment_measure_matrix(sset: StreamlineSet, qids: np.ndarray,
                            cand: np.ndarray, measure: str) -> np.ndarray:
    """(m, c) exact measures between query segments and candidate segments."""
    p0, p1 = sset.segment_endpoints()
    a0, a1 = p0[qids][:, None, :], p1[qids][:, None, :]
    b0, b1 = p0[cand], p1[cand]
    d00 = np.linalg.norm(a0 - b0, axis=-1)
    d01 = np.linalg.norm(a0 - b1, axis=-1)
    d10 = np.linalg.norm(a1 - b0, axis=-1)
    d11 = np.linalg.norm(a1 - b1, axis=-1)
    if measure == "shortest":
        return np.minimum(np.minimum(d00, d01), np.minimum(d10, d11))
    if measure == "average":
        return (d00 + d01 + d10 + d11) / 4.0
    h_ab = np.maximum(np.minimum(d00, d01), np.minimum(d10, d11))
    h_ba = np.maximum(np.minimum(d00, d10), np.minimum(d01, d11))
    return np.maximum(h_ab, h_ba)


def _rank_candidates(cand: np.ndarray, dist: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise sort by (distance, id): pre-sort ids then stable-sort distances."""
    by_id = np.argsort(cand, axis=1, kind="stable")
    cand = np.take_along_axis(cand, by_id, axis=1)
    dist = np.take_along_axis(dist, by_id, axis=1)
    by_d = np.argsort(dist, axis=1, kind="stable")
    return np.take_along_axis(cand, by_d, axis=1), np.take_along_axis(dist, by_d, axis=1)


def _segment_knn_batch(tree: ElementKdTree, sset: StreamlineSet, qids: np.ndarray,
                       k: int, measure: str) -> tuple[np.ndarray, np.ndarray]:
    """Exact top-k for a batch of segment queries; returns (ids, distances)."""
    n = tree.n_elements
    k_eff = min(k, n - 1)
    out_ids = np.empty((len(qids), k_eff), dtype=np.int64)
    out_d = np.empty((len(qids), k_eff), dtype=np.float64)
    if k_eff == 0:
        return out_ids, out_d
    mids = sset.segment_midpoints()
    pending = np.arange(len(qids))
    fetch = min(n, 4 * (k_eff + 1))
    while len(pending):
        q = qids[pending]
        d_rep, cand = tree.tree.query(mids[q], k=fetch)
        if fetch == 1:
            d_rep, cand = d_rep[:, None], cand[:, None]
        exact = _segment_measure_matrix(sset, q, cand, measure)
        exact[cand == q[:, None]] = np.inf  # exclude self
        cand_s, exact_s = _rank_candidates(cand, exact)
        kth = exact_s[:, k_eff - 1] if fetch > k_eff else np.full(len(q), np.inf)
        if fetch >= n:
            done = np.ones(len(q), dtype=bool)
        else:
            # every unfetched element sits at midpoint distance >= d_rep[-1];
            # average and Hausdorff measures are both >= the midpoint
            # distance for two-point sets, so they need no spread slack
            bound = d_rep[:, -1]
            if measure == "shortest":
                bound = bound - tree.spread[q] - tree.max_spread
            done = kth <= bound
        idx = pending[done]
        out_ids[idx] = cand_s[done, :k_eff]
        out_d[idx] = exact_s[done, :k_eff]
        pending = pending[~done]
        fetch = min(n, fetch * 2)
    return out_ids, out_d


def _segment_rbn_one(tree: ElementKdTree, sset: StreamlineSet, qid: int,
                     radius: float, measure: str) -> tuple[np.ndarray, np.ndarray]:
    mid = sset.segment_midpoints()[qid]
    # a hit needs measure <= radius; for average and Hausdorff the midpoint
    # distance is a lower bound on the measure, so an uninflated ball
    # already covers every hit
    ball = radius
    if measure == "shortest":
        ball = radius + tree.spread[qid] + tree.max_spread
    cand = np.asarray(tree.tree.query_ball_point(mid, ball), dtype=np.int64)
    cand = cand[cand != qid]
    if len(cand) == 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    exact = _segment_measure_matrix(sset, np.asarray([qid]), cand[None, :], measure)[0]
    keep = exact <= radius
    cand, exact = cand[keep], exact[keep]
    order = np.lexsort((cand, exact))
    return cand[order], exact[order]


def _curve_knn_one(tree: ElementKdTree, sset: StreamlineSet, qid: int,
                   k: int, measure: str) -> tuple[np.ndarray, np.ndarray]:
    n = tree.n_elements
    k_eff = min(k, n - 1)
    if k_eff == 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    Q = sset.element_points(tree.level, qid, tree.subcurves)
    n_pts = tree.tree.n
    fetch = min(n_pts, max(8, 4 * (k_eff + 1)))
    while True:
        d, idx = tree.tree.query(Q, k=fetch)
        if fetch == 1:
            d, idx = d[:, None], idx[:, None]
        owners = np.unique(tree.owner[idx])
        cand = owners[owners != qid]
        exact = np.array([point_set_distance(
            Q, sset.element_points(tree.level, int(c), tree.subcurves), measure)
            for c in cand])
        order = np.lexsort((cand, exact))
        cand, exact = cand[order], exact[order]
        if fetch >= n_pts or len(cand) >= n - 1:
            return cand[:k_eff], exact[:k_eff]
        # every element outside the pool has all points beyond the horizon
        horizon = float(d[:, -1].min())
        if len(cand) >= k_eff and exact[k_eff - 1] <= horizon:
            return cand[:k_eff], exact[:k_eff]
        fetch = min(n_pts, fetch * 2)


def _curve_rbn_one(tree: ElementKdTree, sset: StreamlineSet, qid: int,
                   radius: float, measure: str) -> tuple[np.ndarray, np.ndarray]:
    Q = sset.element_points(tree.level, qid, tree.subcurves)
    hits = tree.tree.query_ball_point(Q, radius)
    flat = np.unique(np.concatenate([np.asarray(h, dtype=np.int64) for h in hits])
                     if len(Q) else np.empty(0, dtype=np.int64))
    owners = np.unique(tree.owner[flat]) if len(flat) else np.empty(0, dtype=np.int64)
    cand = owners[owners != qid]
    if len(cand) == 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    exact = np.array([point_set_distance(
        Q, sset.element_points(tree.level, int(c), tree.subcurves), measure)
        for c in cand])
    keep = exact <= radius
    cand, exact = cand[keep], exact[keep]
    order = np.lexsort((cand, exact))
    return cand[order], exact[order]


def query_neighbors(tree: ElementKdTree, sset: StreamlineSet, query_id: int,
                    config: NeighborQueryConfig) -> NeighborList:
    """Exact neighbor list for one element under the configured strategy."""
    if not 0 <= query_id < tree.n_elements:
        raise InvalidId(f"element id {query_id} out of range")
    if config.strategy == "knn":
        if tree.level == "segment":
            ids, d = _segment_knn_batch(tree, sset, np.asarray([query_id]),
                                        config.k, config.measure)
            return NeighborList(query_id, ids[0], d[0])
        ids, d = _curve_knn_one(tree, sset, query_id, config.k, config.measure)
        return NeighborList(query_id, ids, d)
    if tree.level == "segment":
        ids, d = _segment_rbn_one(tree, sset, query_id, config.radius, config.measure)
    else:
        ids, d = _curve_rbn_one(tree, sset, query_id, config.radius, config.measure)
    return NeighborList(query_id, ids, d)


def query_all(tree: ElementKdTree, sset: StreamlineSet, config: NeighborQueryConfig,
              threads: int | None = None) -> list[NeighborList]:
    """Neighbor lists for every element; deterministic for any thread count."""
    n = tree.n_elements
    if config.strategy == "knn" and tree.level == "segment":
        chunk = 8192
        spans = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]

        def run(span):
            lo, hi = span
            ids, d = _segment_knn_batch(tree, sset, np.arange(lo, hi),
                                        config.k, config.measure)
            return [NeighborList(lo + i, ids[i], d[i]) for i in range(hi - lo)]

        if threads and threads > 1 and len(spans) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(run, spans))
        else:
            parts = [run(s) for s in spans]
        return [nl for part in parts for nl in part]

    ids = list(range(n))
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda i: query_neighbors(tree, sset, i, config), ids))
    return [query_neighbors(tree, sset, i, config) for i in ids]


def default_rbn_radius(sset: StreamlineSet) -> float:
    """Default radius-based-neighbor radius: 10% of the bounding-box diagonal."""
    return 0.1 * sset.diagonal
