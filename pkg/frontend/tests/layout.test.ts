import { describe, expect, it } from "vitest";

import type { SummaryGraph, SummaryNode } from "../src/api.js";
import { arcControlPoint, nodeRadius, runLayout, splitGroups } from "../src/layout.js";

function node(id: number, size = 10, origin = "detected",
              parent: number | null = null): SummaryNode {
  return {
    node_id: id,
    size,
    origin,
    parent_group: parent,
    isolation: 0,
    internal_density: 1,
    mean_neighbor_distance: 1,
  };
}

function dist(a: { x: number; y: number }, b: { x: number; y: number }): number {
  return Math.hypot(a.x - b.x, a.y - b.y);
}

describe("runLayout", () => {
  it("is deterministic for a fixed graph", () => {
    const g: SummaryGraph = {
      nodes: [node(0), node(1), node(2, 40)],
      edges: [{ a: 0, b: 1, cross_edge_count: 3 }],
    };
    const first = runLayout(g);
    const second = runLayout(g);
    expect(second).toEqual(first);
  });

  it("pushes disconnected communities apart", () => {
    const g: SummaryGraph = { nodes: [node(0), node(1)], edges: [] };
    const before = runLayout(g, { iterations: 0 });
    const after = runLayout(g, { iterations: 300 });
    expect(dist(after[0], after[1])).toBeGreaterThan(dist(before[0], before[1]));
  });

  it("keeps a connected pair closer than a disconnected one", () => {
    const connected: SummaryGraph = {
      nodes: [node(0, 1), node(1, 1)],
      edges: [{ a: 0, b: 1, cross_edge_count: 10 }],
    };
    const disconnected: SummaryGraph = { nodes: [node(0, 1), node(1, 1)], edges: [] };
    const frame = { width: 4000, height: 3000, iterations: 300 };
    const withEdge = runLayout(connected, frame);
    const without = runLayout(disconnected, frame);
    expect(dist(withEdge[0], withEdge[1])).toBeLessThan(dist(without[0], without[1]));
  });

  it("keeps every node inside the frame", () => {
    const g: SummaryGraph = {
      nodes: Array.from({ length: 12 }, (_, i) => node(i, 1 + i)),
      edges: Array.from({ length: 11 }, (_, i) => ({ a: i, b: i + 1, cross_edge_count: 1 })),
    };
    for (const n of runLayout(g, { width: 400, height: 300 })) {
      expect(n.x).toBeGreaterThanOrEqual(0);
      expect(n.x).toBeLessThanOrEqual(400);
      expect(n.y).toBeGreaterThanOrEqual(0);
      expect(n.y).toBeLessThanOrEqual(300);
    }
  });
});

describe("nodeRadius", () => {
  it("scales with the square root of community size", () => {
    expect(nodeRadius(100)).toBeCloseTo(10 * nodeRadius(1), 10);
    expect(nodeRadius(9, 2)).toBeCloseTo(6, 10);
  });
});

describe("arcControlPoint", () => {
  it("bows perpendicular to the chord", () => {
    const c = arcControlPoint({ x: 0, y: 0 }, { x: 10, y: 0 }, 0.2);
    expect(c.x).toBeCloseTo(5, 10);
    expect(c.y).toBeCloseTo(2, 10);
  });

  it("is off the chord for distinct endpoints", () => {
    const a = { x: 1, y: 2 };
    const b = { x: 7, y: -3 };
    const c = arcControlPoint(a, b);
    const cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    expect(Math.abs(cross)).toBeGreaterThan(0);
  });
});

describe("splitGroups", () => {
  it("collects split children under their parent", () => {
    const g: SummaryGraph = {
      nodes: [node(0), node(5, 4, "split_child", 2), node(6, 4, "split_child", 2)],
      edges: [],
    };
    const laidOut = runLayout(g, { iterations: 10 });
    const groups = splitGroups(g, laidOut);
    expect([...groups.keys()]).toEqual([2]);
    expect(groups.get(2)!.map((n) => n.id).sort()).toEqual([5, 6]);
  });

  it("ignores detected and merged nodes", () => {
    const g: SummaryGraph = { nodes: [node(0), node(1, 3, "merged")], edges: [] };
    expect(splitGroups(g, runLayout(g, { iterations: 1 })).size).toBe(0);
  });
});
