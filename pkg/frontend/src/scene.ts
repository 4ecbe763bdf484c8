/**
 * 3D streamline scene builder.
 *
 * Pure functions from geometry, per-segment community colors and a
 * highlight set to flat stroke lists, so the projection and dimming
 * logic is testable without a canvas.  main.ts draws the strokes.
 */

import { cssColor } from "./colors.js";

export interface Camera {
  /** Orbit angles in radians and distance from the look-at target. */
  yaw: number;
  pitch: number;
  distance: number;
  target: [number, number, number];
  /** Pixels per world unit at the target plane. */
  scale: number;
}

export interface Stroke {
  /** Projected 2D points, already in screen space. */
  points: [number, number][];
  color: string;
  opacity: number;
  communityId: number;
}

export function defaultCamera(bboxLo: number[], bboxHi: number[], viewport: number): Camera {
  const target: [number, number, number] = [
    (bboxLo[0] + bboxHi[0]) / 2,
    (bboxLo[1] + bboxHi[1]) / 2,
    (bboxLo[2] + bboxHi[2]) / 2,
  ];
  const extent = Math.max(
    bboxHi[0] - bboxLo[0],
    bboxHi[1] - bboxLo[1],
    bboxHi[2] - bboxLo[2],
    1e-6,
  );
  return {
    yaw: 0.5,
    pitch: 0.4,
    distance: extent * 2,
    target,
    scale: (viewport * 0.8) / extent,
  };
}

/** Orthographic projection after the orbit rotation, centered on screen. */
export function project(
  point: number[],
  camera: Camera,
  width: number,
  height: number,
): [number, number] {
  const [tx, ty, tz] = camera.target;
  const x = point[0] - tx;
  const y = point[1] - ty;
  const z = point[2] - tz;
  const cy = Math.cos(camera.yaw);
  const sy = Math.sin(camera.yaw);
  const cp = Math.cos(camera.pitch);
  const sp = Math.sin(camera.pitch);
  const x1 = cy * x + sy * z;
  const z1 = -sy * x + cy * z;
  const y1 = cp * y - sp * z1;
  return [width / 2 + x1 * camera.scale, height / 2 - y1 * camera.scale];
}

/**
 * Build one stroke per streamline.  Lines are colored by the community of
 * their first segment (a streamline-level partition broadcasts one id to
 * every segment, so the choice only matters mid-refinement at segment
 * level).  With a non-empty highlight set, lines outside it are dimmed;
 * an empty set leaves every line at full opacity.
 */
export function buildStrokes(
  streamlines: number[][][],
  segmentColors: number[],
  highlight: ReadonlySet<number>,
  camera: Camera,
  width: number,
  height: number,
  dimOpacity = 0.15,
): Stroke[] {
  const strokes: Stroke[] = [];
  let segCursor = 0;
  for (const line of streamlines) {
    const nSegs = Math.max(line.length - 1, 1);
    const communityId = segmentColors[segCursor] ?? 0;
    segCursor += nSegs;
    const dim = highlight.size > 0 && !highlight.has(communityId);
    strokes.push({
      points: line.map((p) => project(p, camera, width, height)),
      color: cssColor(communityId),
      opacity: dim ? dimOpacity : 1,
      communityId,
    });
  }
  return strokes;
}
