"""Seeded synthetic streamline generators with construction ground truth."""

from __future__ import annotations

import json

import numpy as np

from .errors import InvalidConfig
from .model import StreamlineSet, _from_polylines


def bundles(b: int = 2, m: int = 10, n: int = 20, gap: float = 100.0,
            jitter: float = 0.1, seed: int = 0, length: float = 10.0,
            spread: float = 1.0) -> tuple[StreamlineSet, np.ndarray]:
    """``b`` parallel bundles of ``m`` lines with ``n`` points each.

    Lines run along x; each bundle's lines are offset inside a (y, z) disc of
    radius ``spread``; bundle centers are ``gap`` apart in y.  Per-point
    Gaussian jitter of scale ``jitter``; labels are bundle ids.
    """
    if b < 1 or m < 1 or n < 2:
        raise InvalidConfig("bundles requires b >= 1, m >= 1, n >= 2")
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, length, n)
    lines, labels = [], []
    for bi in range(b):
        for _ in range(m):
            ang = rng.uniform(0, 2 * np.pi)
            rad = spread * np.sqrt(rng.uniform())
            oy, oz = rad * np.cos(ang), rad * np.sin(ang)
            pts = np.stack([t, np.full_like(t, bi * gap + oy),
                            np.full_like(t, oz)], axis=1)
            if jitter > 0:
                pts = pts + rng.normal(0.0, jitter, pts.shape)
            lines.append(pts)
            labels.append(bi)
    return _from_polylines(lines, labels), np.asarray(labels, dtype=np.int64)


def vortex(c: int = 2, m: int = 8, n: int = 50, gap: float = 20.0,
           jitter: float = 0.0, seed: int = 0, turns: float = 3.0) -> tuple[StreamlineSet, np.ndarray]:
    """Helical line families around ``c`` parallel axes; labels are axis ids."""
    if c < 1 or m < 1 or n < 2:
        raise InvalidConfig("vortex requires c >= 1, m >= 1, n >= 2")
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 2 * np.pi * turns, n)
    lines, labels = [], []
    for ci in range(c):
        for _ in range(m):
            r = rng.uniform(0.5, 1.5)
            phase = rng.uniform(0, 2 * np.pi)
            pts = np.stack([t / (2 * np.pi),
                            ci * gap + r * np.cos(t + phase),
                            r * np.sin(t + phase)], axis=1)
            if jitter > 0:
                pts = pts + rng.normal(0.0, jitter, pts.shape)
            lines.append(pts)
            labels.append(ci)
    return _from_polylines(lines, labels), np.asarray(labels, dtype=np.int64)


def grid(nx: int = 5, ny: int = 5, n: int = 10, spacing: float = 1.0,
         length: float = 10.0, seed: int = 0) -> tuple[StreamlineSet, np.ndarray]:
    """Uniform straight lines on an (nx, ny) grid; single component label 0."""
    if nx < 1 or ny < 1 or n < 2:
        raise InvalidConfig("grid requires nx, ny >= 1 and n >= 2")
    t = np.linspace(0.0, length, n)
    lines = []
    for ix in range(nx):
        for iy in range(ny):
            lines.append(np.stack([t, np.full_like(t, ix * spacing),
                                   np.full_like(t, iy * spacing)], axis=1))
    labels = np.zeros(nx * ny, dtype=np.int64)
    return _from_polylines(lines, labels), labels


def to_json(sset: StreamlineSet, labels: np.ndarray | None = None) -> str:
    """Serialize to the canonical dataset JSON (deterministic byte output)."""
    doc = {"streamlines": [sset.line_points(i).tolist()
                           for i in range(sset.n_streamlines)]}
    if labels is not None:
        doc["labels"] = [int(v) for v in labels]
    elif sset.labels is not None:
        doc["labels"] = [int(v) for v in sset.labels]
    return json.dumps(doc, sort_keys=True)
