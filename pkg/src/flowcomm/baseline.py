"""PCA k-means baseline at streamline and segment levels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .community import Partition
from .errors import DegenerateData, EmptyDataset, InvalidK
from .model import StreamlineSet


@dataclass(frozen=True)
class KMeansConfig:
    k_c: int
    max_iters: int = 100
    variance_retained: float = 0.95
    seed: int = 0


def _resample_to(points: np.ndarray, n: int) -> np.ndarray:
    seglen = np.linalg.norm(np.diff(points, axis=0), axis=1)
    s = np.concatenate(([0.0], np.cumsum(seglen)))
    targets = np.linspace(0.0, s[-1], n)
    out = np.empty((n, 3))
    for d in range(3):
        out[:, d] = np.interp(targets, s, points[:, d])
    return out


def featurize(sset: StreamlineSet, level: str, points_per_line: int = 32,
              pad_short: bool = False) -> np.ndarray:
    """Normalized-coordinate feature rows, one per element.

    Streamlines are resampled by arc length to ``points_per_line`` points;
    segments contribute their two endpoints.  Coordinates are min-max
    normalized by the dataset bounding box, so all entries lie in [0, 1].
    ``pad_short`` reproduces the zero-padding artifact instead of resampling
    streamlines shorter than the target point count.
    """
    if sset.n_segments == 0:
        raise EmptyDataset("nothing to featurize")
    lo, hi = sset.bounding_box
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    if level == "segment":
        a, b = sset.segment_endpoints()
        rows = np.concatenate(((a - lo) / span, (b - lo) / span), axis=1)
        return rows
    if level == "streamline":
        if points_per_line < 2:
            raise InvalidK("points_per_line must be >= 2")
        rows = np.empty((sset.n_streamlines, 3 * points_per_line))
        for i in range(sset.n_streamlines):
            pts = sset.line_points(i)
            if pad_short and len(pts) < points_per_line:
                padded = np.zeros((points_per_line, 3))
                padded[:len(pts)] = (pts - lo) / span
                rows[i] = padded.reshape(-1)
            else:
                rs = _resample_to(pts, points_per_line)
                rows[i] = ((rs - lo) / span).reshape(-1)
        return rows
    raise InvalidK(f"unsupported feature level {level!r}")


def pca_reduce(m: np.ndarray, variance_retained: float = 0.95) -> tuple[np.ndarray, int]:
    """Project onto the fewest principal components reaching the variance goal."""
    if m.shape[0] < 2:
        raise DegenerateData("PCA needs at least 2 rows")
    centered = m - m.mean(axis=0)
    # SVD of the centered data: singular values give component variances
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    var = s ** 2
    total = var.sum()
    if total == 0.0:
        return np.zeros((m.shape[0], 1)), 1
    frac = np.cumsum(var) / total
    n_comp = int(np.searchsorted(frac, variance_retained - 1e-12) + 1)
    n_comp = min(n_comp, len(s))
    return centered @ vt[:n_comp].T, n_comp


def explained_variance(m: np.ndarray) -> np.ndarray:
    centered = m - m.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    var = s ** 2
    total = var.sum()
    return var / total if total > 0 else np.zeros_like(var)


def kmeans(m: np.ndarray, config: KMeansConfig) -> tuple[Partition, float, list[float]]:
    """Seeded k-means++ with Lloyd iterations.

    Returns (partition, final WCSS, per-iteration WCSS trace).
    """
    n, _ = m.shape
    k = config.k_c
    if not 1 <= k <= n:
        raise InvalidK(f"k_c must be in [1, {n}], got {k}")

    # k-means++ is initialization-sensitive; run a handful of seeded starts
    # and keep the lowest-WCSS one (all derived from config.seed, so the
    # result is still deterministic)
    best_assign, best_trace = None, None
    for restart in range(10):
        rng = np.random.default_rng((config.seed, restart))
        centers = np.empty((k, m.shape[1]))
        centers[0] = m[rng.integers(n)]
        d2 = np.sum((m - centers[0]) ** 2, axis=1)
        for c in range(1, k):
            probs = d2 / d2.sum() if d2.sum() > 0 else np.full(n, 1.0 / n)
            centers[c] = m[rng.choice(n, p=probs)]
            d2 = np.minimum(d2, np.sum((m - centers[c]) ** 2, axis=1))

        assign = np.zeros(n, dtype=np.int32)
        trace: list[float] = []
        for _ in range(config.max_iters):
            d = np.sum((m[:, None, :] - centers[None, :, :]) ** 2, axis=2)
            new_assign = np.argmin(d, axis=1).astype(np.int32)
            wcss = float(d[np.arange(n), new_assign].sum())
            trace.append(wcss)
            if np.array_equal(new_assign, assign) and len(trace) > 1:
                break
            assign = new_assign
            for c in range(k):
                members = m[assign == c]
                if len(members):
                    centers[c] = members.mean(axis=0)
                else:
                    # emptied cluster: restart it at the worst-served point
                    centers[c] = m[int(np.argmax(
                        np.sum((m - centers[assign]) ** 2, axis=1)))]
        if best_trace is None or trace[-1] < best_trace[-1]:
            best_assign, best_trace = assign, trace
    assign, trace = best_assign, best_trace
    # dense relabel by first appearance for determinism
    order = {}
    dense = np.empty(n, dtype=np.int32)
    for i, c in enumerate(assign):
        c = int(c)
        if c not in order:
            order[c] = len(order)
        dense[i] = order[c]
    p = Partition("feature", dense, len(order), 0.0)
    return p, trace[-1], trace
