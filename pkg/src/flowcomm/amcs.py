"""Adjacency Matrix of Curve Segments for a selected segment set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySelection, LevelMismatch
from .graph import Csng
from .model import StreamlineSet


@dataclass
class Amcs:
    n: int
    ordering: np.ndarray          # segment ids; by-streamline groups, in order
    entries: np.ndarray           # (m, 2) matrix positions (row, col)
    symmetric: bool
    group_bounds: np.ndarray      # matrix positions where a new streamline starts

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "symmetric": self.symmetric,
            "ordering": self.ordering.tolist(),
            "entries": self.entries.tolist(),
            "group_bounds": self.group_bounds.tolist(),
        }


def build_amcs(g: Csng, member_segments, sset: StreamlineSet,
               ordering: str = "by_streamline") -> Amcs:
    """Induced boolean adjacency over the selected segments.

    ``by_streamline`` groups segments of one streamline contiguously, sorted
    from the curve's beginning to its end; ``by_id`` uses plain id order
    (identical here because global segment ids follow that same order).
    """
    if g.level != "segment":
        raise LevelMismatch("AMCS requires a segment-level CSNG")
    members = np.unique(np.asarray(list(member_segments), dtype=np.int64))
    if len(members) == 0:
        raise EmptySelection("no segments selected")
    if ordering not in ("by_streamline", "by_id"):
        raise LevelMismatch(f"unknown ordering {ordering!r}")
    # global ids are dense by (streamline, position), so both orderings sort by id
    order = np.sort(members)
    pos = np.full(g.n_nodes, -1, dtype=np.int64)
    pos[order] = np.arange(len(order))

    src = np.repeat(np.arange(g.n_nodes, dtype=np.int64), np.diff(g.indptr))
    dst = g.indices.astype(np.int64)
    keep = (pos[src] >= 0) & (pos[dst] >= 0)
    rows, cols = pos[src[keep]], pos[dst[keep]]
    entries = np.stack((rows, cols), axis=1) if len(rows) else np.empty((0, 2), dtype=np.int64)
    entries = entries[np.lexsort((entries[:, 1], entries[:, 0]))] if len(entries) else entries

    lines = sset.seg_line[order]
    starts = np.nonzero(np.concatenate(([True], lines[1:] != lines[:-1])))[0]
    return Amcs(len(order), order, entries, not g.directed, starts)


def rasterize_amcs(m: Amcs, max_pixels: int = 512, palette: str = "gray") -> bytes:
    """Render to a binary PPM (P6) image with max-pooled downsampling.

    One cell per pixel when the matrix fits; otherwise a pixel is set when
    any covered cell is set.  Streamline-group boundaries are drawn as
    separator lines.
    """
    if max_pixels < 16:
        raise EmptySelection("max_pixels must be >= 16")
    palettes = {
        "gray": ((245, 245, 245), (30, 30, 30), (180, 180, 180)),
        "heat": ((255, 250, 240), (200, 30, 30), (150, 150, 170)),
    }
    if palette not in palettes:
        raise LevelMismatch(f"unknown palette {palette!r}")
    bg, fg, sep = palettes[palette]
    size = min(m.n, max_pixels)
    scale = m.n / size
    img = np.empty((size, size, 3), dtype=np.uint8)
    img[:] = bg
    # separators first so set cells are never occluded
    for b in m.group_bounds:
        if b == 0:
            continue
        p = int(b / scale)
        if 0 < p < size:
            img[p, :] = sep
            img[:, p] = sep
    if len(m.entries):
        px = (m.entries[:, 0] / scale).astype(np.int64).clip(0, size - 1)
        py = (m.entries[:, 1] / scale).astype(np.int64).clip(0, size - 1)
        img[px, py] = fg
    header = f"P6 {size} {size} 255\n".encode()
    return header + img.tobytes()
