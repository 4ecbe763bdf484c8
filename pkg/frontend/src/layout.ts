/**
 * Force-directed layout for the community summary graph.
 *
 * Spring-embedder in the Fruchterman and Reingold style: pairwise
 * repulsion scaled by node size, spring attraction along edges scaled by
 * cross edge count, a weak centering pull, and a cooling schedule.
 * Positions are seeded from the node id hash so the layout is
 * deterministic for a given graph.
 */

import type { SummaryGraph, SummaryNode } from "./api.js";
import { stableHash } from "./colors.js";

export interface LayoutNode {
  id: number;
  x: number;
  y: number;
  radius: number;
  parentGroup: number | null;
}

export interface LayoutOptions {
  width?: number;
  height?: number;
  iterations?: number;
  /** Base node radius in pixels for a size-1 community. */
  unitRadius?: number;
}

function initialPosition(node: SummaryNode, width: number, height: number): [number, number] {
  const h = stableHash(node.node_id);
  const x = ((h & 0xffff) / 0xffff) * width;
  const y = (((h >>> 16) & 0xffff) / 0xffff) * height;
  return [x, y];
}

export function nodeRadius(size: number, unitRadius = 4): number {
  return unitRadius * Math.sqrt(Math.max(size, 1));
}

export function runLayout(graph: SummaryGraph, opts: LayoutOptions = {}): LayoutNode[] {
  const width = opts.width ?? 800;
  const height = opts.height ?? 600;
  const iterations = opts.iterations ?? 200;
  const unitRadius = opts.unitRadius ?? 4;

  const nodes: LayoutNode[] = graph.nodes.map((n) => {
    const [x, y] = initialPosition(n, width, height);
    return {
      id: n.node_id,
      x,
      y,
      radius: nodeRadius(n.size, unitRadius),
      parentGroup: n.parent_group,
    };
  });
  const index = new Map(nodes.map((n, i) => [n.id, i]));
  const n = nodes.length;
  if (n === 0) return nodes;

  const area = width * height;
  const k = Math.sqrt(area / n);
  const maxCross = graph.edges.reduce((m, e) => Math.max(m, e.cross_edge_count), 1);

  const dx = new Float64Array(n);
  const dy = new Float64Array(n);
  let temperature = Math.min(width, height) / 8;
  const cool = Math.pow(0.02, 1 / Math.max(iterations, 1));

  for (let step = 0; step < iterations; step++) {
    dx.fill(0);
    dy.fill(0);

    // Repulsion, scaled by the sizes of both endpoints so big communities
    // claim proportionally more room.
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let ex = nodes[i].x - nodes[j].x;
        let ey = nodes[i].y - nodes[j].y;
        let d2 = ex * ex + ey * ey;
        if (d2 < 1e-9) {
          // Perturb coincident nodes apart deterministically.
          ex = 1e-3 * (i - j);
          ey = 1e-3;
          d2 = ex * ex + ey * ey;
        }
        const scale = (nodes[i].radius * nodes[j].radius) / (unitRadius * unitRadius);
        const f = (k * k * scale) / d2;
        dx[i] += ex * f;
        dy[i] += ey * f;
        dx[j] -= ex * f;
        dy[j] -= ey * f;
      }
    }

    // Attraction along summary edges, heavier edges pull harder.
    for (const e of graph.edges) {
      const i = index.get(e.a);
      const j = index.get(e.b);
      if (i === undefined || j === undefined) continue;
      const ex = nodes[i].x - nodes[j].x;
      const ey = nodes[i].y - nodes[j].y;
      const d = Math.sqrt(ex * ex + ey * ey) + 1e-9;
      const w = 0.25 + 0.75 * (e.cross_edge_count / maxCross);
      const f = ((d * d) / k) * (w / d);
      dx[i] -= ex * f;
      dy[i] -= ey * f;
      dx[j] += ex * f;
      dy[j] += ey * f;
    }

    // Weak centering so disconnected components stay on screen.
    for (let i = 0; i < n; i++) {
      dx[i] += (width / 2 - nodes[i].x) * 0.01;
      dy[i] += (height / 2 - nodes[i].y) * 0.01;
    }

    for (let i = 0; i < n; i++) {
      const d = Math.sqrt(dx[i] * dx[i] + dy[i] * dy[i]) + 1e-9;
      const lim = Math.min(d, temperature);
      const r = nodes[i].radius;
      nodes[i].x = Math.min(width - r, Math.max(r, nodes[i].x + (dx[i] / d) * lim));
      nodes[i].y = Math.min(height - r, Math.max(r, nodes[i].y + (dy[i] / d) * lim));
    }
    temperature *= cool;
  }
  return nodes;
}

/**
 * Control point for a curved arc between two laid-out nodes.  The edge is
 * drawn as a quadratic bezier bowing to the left of the a-to-b direction,
 * so edges never overlap the straight chord between circles.
 */
export function arcControlPoint(
  a: { x: number; y: number },
  b: { x: number; y: number },
  bend = 0.18,
): { x: number; y: number } {
  const mx = (a.x + b.x) / 2;
  const my = (a.y + b.y) / 2;
  return {
    x: mx - (b.y - a.y) * bend,
    y: my + (b.x - a.x) * bend,
  };
}

/**
 * Group split children by their parent for the dashed outline rendering.
 * Returns parent id to member layout nodes, only for groups with at least
 * one child created by a split.
 */
export function splitGroups(
  graph: SummaryGraph,
  laidOut: LayoutNode[],
): Map<number, LayoutNode[]> {
  const byId = new Map(laidOut.map((n) => [n.id, n]));
  const groups = new Map<number, LayoutNode[]>();
  for (const node of graph.nodes) {
    if (node.origin !== "split_child" || node.parent_group === null) continue;
    const ln = byId.get(node.node_id);
    if (!ln) continue;
    const members = groups.get(node.parent_group) ?? [];
    members.push(ln);
    groups.set(node.parent_group, members);
  }
  return groups;
}
