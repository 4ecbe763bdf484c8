"""Streamline dataset ingestion, preprocessing and decomposition.

A dataset is stored as one flat point array plus per-streamline offsets, so
every downstream stage (KD-trees, graph construction, feature matrices) can
work on contiguous numpy buffers without copying.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDataset, InvalidSpacing, LevelMismatch, MalformedInput

LEVELS = ("segment", "subcurve", "streamline")


@dataclass(frozen=True)
class SubCurve:
    """A run of consecutive segments on one streamline."""

    id: int
    streamline_id: int
    seg_start: int  # first global segment id (inclusive)
    seg_stop: int   # last global segment id (exclusive)

    @property
    def segment_ids(self) -> range:
        return range(self.seg_start, self.seg_stop)

    def __len__(self) -> int:
        return self.seg_stop - self.seg_start


@dataclass(frozen=True)
class ElementAttributes:
    saliency: float
    avg_neighbor_distance: float
    curvature: float


@dataclass
class StreamlineSet:
    """Immutable streamline collection with derived segment indexing."""

    points: np.ndarray        # (P, 3) float64
    line_offsets: np.ndarray  # (L + 1,) int64
    labels: np.ndarray | None = None
    dropped_streamlines: int = 0

    # derived, filled in __post_init__
    seg_first: np.ndarray = field(init=False, repr=False)   # (N,) point idx of first endpoint
    seg_line: np.ndarray = field(init=False, repr=False)    # (N,) owning streamline
    seg_offsets: np.ndarray = field(init=False, repr=False)  # (L + 1,) segment range per line

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=np.float64)
        self.line_offsets = np.asarray(self.line_offsets, dtype=np.int64)
        counts = np.diff(self.line_offsets)
        if len(counts) == 0:
            raise EmptyDataset("no streamlines")
        if np.any(counts < 2):
            raise MalformedInput("streamline with fewer than 2 points")
        seg_counts = counts - 1
        self.seg_offsets = np.concatenate(([0], np.cumsum(seg_counts)))
        # point index of each segment's first endpoint: skip the last point of every line
        mask = np.ones(len(self.points), dtype=bool)
        mask[self.line_offsets[1:] - 1] = False
        self.seg_first = np.nonzero(mask)[0].astype(np.int64)
        self.seg_line = np.repeat(np.arange(len(counts), dtype=np.int64), seg_counts)

    @property
    def n_streamlines(self) -> int:
        return len(self.line_offsets) - 1

    @property
    def n_segments(self) -> int:
        return len(self.seg_first)

    def line_points(self, i: int) -> np.ndarray:
        return self.points[self.line_offsets[i]:self.line_offsets[i + 1]]

    def segments_of_line(self, i: int) -> range:
        return range(int(self.seg_offsets[i]), int(self.seg_offsets[i + 1]))

    def segment_endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """(N,3) arrays of first and second endpoints for every segment."""
        return self.points[self.seg_first], self.points[self.seg_first + 1]

    def segment_midpoints(self) -> np.ndarray:
        a, b = self.segment_endpoints()
        return 0.5 * (a + b)

    def segment_lengths(self) -> np.ndarray:
        a, b = self.segment_endpoints()
        return np.linalg.norm(b - a, axis=1)

    @property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.points.min(axis=0), self.points.max(axis=0)

    @property
    def diagonal(self) -> float:
        lo, hi = self.bounding_box
        return float(np.linalg.norm(hi - lo))

    def element_points(self, level: str, element_id: int,
                       subcurves: list[SubCurve] | None = None) -> np.ndarray:
        """Sample point set of one element at the given level."""
        if level == "segment":
            i = self.seg_first[element_id]
            return self.points[i:i + 2]
        if level == "streamline":
            return self.line_points(element_id)
        if level == "subcurve":
            if subcurves is None:
                raise LevelMismatch("sub-curve decomposition required")
            sc = subcurves[element_id]
            lo = self.seg_first[sc.seg_start]
            hi = self.seg_first[sc.seg_stop - 1] + 2
            return self.points[lo:hi]
        raise LevelMismatch(f"unknown level {level!r}")

    def n_elements(self, level: str, subcurves: list[SubCurve] | None = None) -> int:
        if level == "segment":
            return self.n_segments
        if level == "streamline":
            return self.n_streamlines
        if level == "subcurve":
            if subcurves is None:
                raise LevelMismatch("sub-curve decomposition required")
            return len(subcurves)
        raise LevelMismatch(f"unknown level {level!r}")


def _from_polylines(polylines: list[np.ndarray], labels=None, dropped: int = 0) -> StreamlineSet:
    kept, kept_labels = [], []
    for idx, pts in enumerate(polylines):
        pts = np.asarray(pts, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise MalformedInput(f"streamline {idx}: expected (n, 3) points")
        if not np.all(np.isfinite(pts)):
            raise MalformedInput(f"streamline {idx}: non-finite coordinate")
        # collapse zero-length segments (duplicate consecutive points)
        if len(pts) > 1:
            keep = np.ones(len(pts), dtype=bool)
            keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
            pts = pts[keep]
        if len(pts) < 2:
            dropped += 1
            continue
        kept.append(pts)
        if labels is not None:
            kept_labels.append(labels[idx])
    if not kept:
        raise EmptyDataset("no valid streamline survives ingestion")
    offsets = np.concatenate(([0], np.cumsum([len(p) for p in kept])))
    lab = np.asarray(kept_labels, dtype=np.int64) if labels is not None else None
    return StreamlineSet(np.concatenate(kept), offsets, labels=lab,
                         dropped_streamlines=dropped)


def load_streamlines(source, format: str = "json") -> StreamlineSet:
    """Parse a byte stream / string into a validated StreamlineSet.

    JSON format: ``{"streamlines": [[[x,y,z], ...], ...], "labels": [...]?}``.
    Text format: one ``x y z`` point per line, blank line terminates a
    streamline, ``#`` starts a comment line.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    else:
        text = source
    if format == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise MalformedInput(f"invalid JSON: {e}") from e
        if not isinstance(doc, dict) or "streamlines" not in doc:
            raise MalformedInput("missing 'streamlines' key")
        polylines = []
        for line in doc["streamlines"]:
            try:
                polylines.append(np.asarray(line, dtype=np.float64))
            except (ValueError, TypeError) as e:
                raise MalformedInput(f"non-numeric point data: {e}") from e
        labels = doc.get("labels")
        if labels is not None and len(labels) != len(polylines):
            raise MalformedInput("labels length does not match streamline count")
        return _from_polylines(polylines, labels)
    if format == "text":
        polylines, current = [], []
        for raw in text.splitlines():
            line = raw.strip()
            if line.startswith("#"):
                continue
            if not line:
                if current:
                    polylines.append(np.asarray(current))
                    current = []
                continue
            parts = line.split()
            if len(parts) != 3:
                raise MalformedInput(f"expected 'x y z', got {line!r}")
            try:
                current.append([float(v) for v in parts])
            except ValueError as e:
                raise MalformedInput(f"non-numeric coordinate in {line!r}") from e
        if current:
            polylines.append(np.asarray(current))
        if not polylines:
            raise EmptyDataset("no streamlines in text input")
        return _from_polylines(polylines)
    raise MalformedInput(f"unknown format {format!r}")


def resample_uniform(sset: StreamlineSet, spacing: float) -> StreamlineSet:
    """Resample every streamline to uniform arc spacing along the polyline.

    New points sit at multiples of ``spacing`` of the cumulative chord-length
    parameter; the original endpoint is always kept as the final point.
    """
    if not np.isfinite(spacing) or spacing <= 0:
        raise InvalidSpacing(f"spacing must be positive, got {spacing}")
    out = []
    for i in range(sset.n_streamlines):
        pts = sset.line_points(i)
        seglen = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        s = np.concatenate(([0.0], np.cumsum(seglen)))
        total = s[-1]
        targets = np.arange(0.0, total, spacing)
        # avoid a duplicate of the endpoint when total is a near-exact multiple
        if len(targets) > 1 and total - targets[-1] < spacing * 1e-9:
            targets = targets[:-1]
        targets = np.concatenate((targets, [total]))
        new = np.empty((len(targets), 3))
        for d in range(3):
            new[:, d] = np.interp(targets, s, pts[:, d])
        new[0] = pts[0]
        new[-1] = pts[-1]
        out.append(new)
    return _from_polylines(out, sset.labels)


def filter_short(sset: StreamlineSet, min_segments: int) -> StreamlineSet:
    """Keep only streamlines with at least ``min_segments`` segments."""
    if min_segments < 1:
        raise MalformedInput("min_segments must be >= 1")
    keep = np.diff(sset.line_offsets) - 1 >= min_segments
    if not np.any(keep):
        raise EmptyDataset("no streamline meets the minimum length")
    polylines = [sset.line_points(i) for i in np.nonzero(keep)[0]]
    labels = sset.labels[keep] if sset.labels is not None else None
    return _from_polylines(polylines, labels)


def decompose_subcurves(sset: StreamlineSet, n: int) -> list[SubCurve]:
    """Partition every streamline into runs of ``n`` consecutive segments.

    A trailing remainder shorter than ``n`` becomes its own sub-curve.
    """
    if n < 1:
        raise MalformedInput("sub-curve length must be >= 1")
    subcurves = []
    for line in range(sset.n_streamlines):
        lo, hi = int(sset.seg_offsets[line]), int(sset.seg_offsets[line + 1])
        for start in range(lo, hi, n):
            subcurves.append(SubCurve(len(subcurves), line, start, min(start + n, hi)))
    return subcurves


def _segment_directions(sset: StreamlineSet) -> np.ndarray:
    a, b = sset.segment_endpoints()
    d = b - a
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def compute_attributes(sset: StreamlineSet, csng, window: int = 5) -> list[ElementAttributes]:
    """Per-segment saliency, mean neighbor distance and local curvature.

    Saliency is the mean unsigned angle (radians, in [0, pi]) between a
    segment's direction and its out-neighbors' directions.  Curvature sums
    turning angles over a ``window``-point sliding window (clamped at line
    ends) and divides by the arc length between the first and last window
    segment midpoints.
    """
    if csng.level != "segment":
        raise LevelMismatch("attributes require a segment-level CSNG")
    if csng.n_nodes != sset.n_segments:
        raise LevelMismatch("CSNG was built over a different dataset")
    dirs = _segment_directions(sset)
    seglen = sset.segment_lengths()

    saliency = np.zeros(sset.n_segments)
    avg_dist = np.zeros(sset.n_segments)
    for i in range(sset.n_segments):
        lo, hi = csng.indptr[i], csng.indptr[i + 1]
        if hi == lo:
            continue
        nbrs = csng.indices[lo:hi]
        cosines = np.clip(dirs[nbrs] @ dirs[i], -1.0, 1.0)
        saliency[i] = float(np.mean(np.arccos(cosines)))
        avg_dist[i] = float(np.mean(csng.distances[lo:hi]))

    curvature = np.zeros(sset.n_segments)
    for line in range(sset.n_streamlines):
        segs = sset.segments_of_line(line)
        n_pts = len(segs) + 1
        base = segs.start
        if len(segs) < 2:
            continue
        ldirs = dirs[segs.start:segs.stop]
        llen = seglen[segs.start:segs.stop]
        turning = np.arccos(np.clip(np.sum(ldirs[1:] * ldirs[:-1], axis=1), -1.0, 1.0))
        for local in range(len(segs)):
            lo = max(0, min(local - (window // 2) + 1, n_pts - window))
            hi = min(n_pts - 1, lo + window - 1)  # last point index in window
            first_seg, last_seg = lo, hi - 1      # local segment indices in window
            if last_seg <= first_seg:
                continue
            angle = float(np.sum(turning[first_seg:last_seg]))
            arc = float(np.sum(llen[first_seg:last_seg + 1])
                        - 0.5 * (llen[first_seg] + llen[last_seg]))
            if arc > 0:
                curvature[base + local] = angle / arc

    return [ElementAttributes(float(saliency[i]), float(avg_dist[i]), float(curvature[i]))
            for i in range(sset.n_segments)]
