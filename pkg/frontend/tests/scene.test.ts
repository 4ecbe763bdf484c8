import { describe, expect, it } from "vitest";

import { cssColor } from "../src/colors.js";
import { buildStrokes, defaultCamera, project } from "../src/scene.js";
import { initialState, pruneSelection } from "../src/state.js";

const lines = [
  [[0, 0, 0], [1, 0, 0], [2, 0, 0]], // 2 segments
  [[0, 2, 0], [1, 2, 0]],            // 1 segment
];
// Per-segment community ids matching the server's colors endpoint.
const segColors = [5, 5, 9];

function camera() {
  return defaultCamera([0, 0, 0], [2, 2, 1], 400);
}

describe("project", () => {
  it("maps the camera target to the screen center", () => {
    const cam = camera();
    const [x, y] = project([...cam.target], cam, 400, 300);
    expect(x).toBeCloseTo(200, 8);
    expect(y).toBeCloseTo(150, 8);
  });

  it("preserves left-right ordering along the view x axis", () => {
    const cam = { ...camera(), yaw: 0, pitch: 0 };
    const [xa] = project([0, 0, 0], cam, 400, 300);
    const [xb] = project([2, 0, 0], cam, 400, 300);
    expect(xb).toBeGreaterThan(xa);
  });
});

describe("buildStrokes", () => {
  it("colors each streamline by its community", () => {
    const strokes = buildStrokes(lines, segColors, new Set(), camera(), 400, 300);
    expect(strokes).toHaveLength(2);
    expect(strokes[0].color).toBe(cssColor(5));
    expect(strokes[1].color).toBe(cssColor(9));
  });

  it("draws two distinct colors for a two-community set", () => {
    const strokes = buildStrokes(lines, segColors, new Set(), camera(), 400, 300);
    expect(new Set(strokes.map((s) => s.color)).size).toBe(2);
  });

  it("dims everything outside a non-empty highlight set", () => {
    const strokes = buildStrokes(lines, segColors, new Set([5]), camera(), 400, 300, 0.1);
    expect(strokes[0].opacity).toBe(1);
    expect(strokes[1].opacity).toBe(0.1);
  });

  it("keeps uniform opacity for an empty highlight", () => {
    const strokes = buildStrokes(lines, segColors, new Set(), camera(), 400, 300);
    expect(strokes.every((s) => s.opacity === 1)).toBe(true);
  });
});

describe("pruneSelection", () => {
  it("drops selections that vanished from the summary", () => {
    const state = initialState("http://test");
    state.selected = new Set([1, 2, 3]);
    pruneSelection(state, {
      nodes: [
        { node_id: 2, size: 1, origin: "detected", parent_group: null,
          isolation: 0, internal_density: 1, mean_neighbor_distance: 0 },
      ],
      edges: [],
    });
    expect([...state.selected]).toEqual([2]);
  });
});
