"""Partition-vs-ground-truth agreement and per-community summary statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .community import Partition
from .errors import LengthMismatch, LevelMismatch
from .graph import Csng, symmetrize


@dataclass
class CommunityStats:
    community_id: int
    size: int
    internal_edges: int
    external_edges: int
    isolation: float          # external / (internal + external), 0 if edgeless
    internal_density: float   # internal / C(size, 2), 0 for singletons
    mean_neighbor_distance: float


def jaccard(a, b) -> float:
    """|A n B| / |A u B|; defined as 1 when both sets are empty."""
    a, b = set(a), set(b)
    union = len(a | b)
    if union == 0:
        return 1.0
    return len(a & b) / union


def weighted_jaccard(p: Partition, labels: np.ndarray) -> float:
    """Size-weighted best-match Jaccard of predicted communities vs truth."""
    labels = np.asarray(labels)
    if len(labels) != len(p.assignment):
        raise LengthMismatch("ground truth length does not match partition")
    pred = p.assignment
    total = 0.0
    classes = [np.nonzero(labels == v)[0] for v in np.unique(labels)]
    class_sets = [set(c.tolist()) for c in classes]
    for c in range(p.n_communities):
        members = set(np.nonzero(pred == c)[0].tolist())
        best = max((jaccard(members, cls) for cls in class_sets), default=0.0)
        total += len(members) * best
    return total / len(pred)


def community_stats(g: Csng, p: Partition) -> list[CommunityStats]:
    """Per-community size, edge counts, isolation and density on the
    symmetrized graph."""
    if len(p.assignment) != g.n_nodes:
        raise LevelMismatch("partition does not cover the graph")
    sg = symmetrize(g)
    comm = np.asarray(p.assignment)
    src = np.repeat(np.arange(sg.n_nodes), np.diff(sg.indptr))
    dst = sg.indices
    internal_arc = comm[src] == comm[dst]
    n_c = p.n_communities
    sizes = np.bincount(comm, minlength=n_c)
    internal = np.bincount(comm[src], weights=internal_arc.astype(float),
                           minlength=n_c) / 2.0
    external = np.bincount(comm[src], weights=(~internal_arc).astype(float),
                           minlength=n_c)
    dist_sum = np.bincount(comm[src],
                           weights=sg.distances.astype(np.float64) * internal_arc,
                           minlength=n_c) / 2.0
    out = []
    for c in range(n_c):
        size = int(sizes[c])
        n_int, n_ext = int(internal[c]), int(external[c])
        total = n_int + n_ext
        isolation = n_ext / total if total else 0.0
        density = n_int / (size * (size - 1) / 2) if size >= 2 else 0.0
        mean_d = dist_sum[c] / n_int if n_int else 0.0
        out.append(CommunityStats(c, size, n_int, n_ext, isolation, density, float(mean_d)))
    return out


TEMPLATES = ("large_isolated", "large_dispersed", "small_connected")


def filter_communities(stats: list[CommunityStats], template, *,
                       size_hi: float | None = None, size_lo: float | None = None,
                       isolation_lo: float = 0.05, distance_hi: float | None = None,
                       density_hi: float = 0.5) -> set[int]:
    """Select community ids matching a named template or a custom predicate.

    Thresholds default to dataset quantiles: size_hi / size_lo are the 75th /
    25th size percentiles, distance_hi the 75th mean-distance percentile.
    """
    if not stats:
        return set()
    if callable(template):
        return {s.community_id for s in stats if template(s)}
    sizes = np.array([s.size for s in stats])
    dists = np.array([s.mean_neighbor_distance for s in stats])
    s_hi = size_hi if size_hi is not None else float(np.percentile(sizes, 75))
    s_lo = size_lo if size_lo is not None else float(np.percentile(sizes, 25))
    d_hi = distance_hi if distance_hi is not None else float(np.percentile(dists, 75))
    if template == "large_isolated":
        return {s.community_id for s in stats
                if s.size >= s_hi and s.isolation <= isolation_lo}
    if template == "large_dispersed":
        return {s.community_id for s in stats
                if s.size >= s_hi and s.mean_neighbor_distance >= d_hi}
    if template == "small_connected":
        return {s.community_id for s in stats
                if s.size <= s_lo and s.internal_density >= density_hi}
    raise ValueError(f"unknown template {template!r}")
