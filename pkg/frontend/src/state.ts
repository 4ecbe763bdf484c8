/**
 * View state: the small set of facts the client keeps between renders.
 * Analysis state lives on the server; everything here can be rebuilt
 * from the session id after a reload.
 */

import type { DetectionParams, NeighborParams, SummaryGraph } from "./api.js";
import type { MatrixParams, RenderingParams } from "./panels.js";
import {
  defaultDetectionParams,
  defaultMatrixParams,
  defaultNeighborParams,
  defaultRenderingParams,
} from "./panels.js";
import type { Camera } from "./scene.js";

export interface ViewState {
  baseUrl: string;
  datasetId: string | null;
  sessionId: string | null;
  camera: Camera | null;
  selected: Set<number>;
  neighbor: Required<NeighborParams>;
  detection: Required<DetectionParams>;
  rendering: RenderingParams;
  matrix: MatrixParams;
}

export function initialState(baseUrl: string): ViewState {
  return {
    baseUrl,
    datasetId: null,
    sessionId: null,
    camera: null,
    selected: new Set(),
    neighbor: defaultNeighborParams(),
    detection: defaultDetectionParams(),
    rendering: defaultRenderingParams(),
    matrix: defaultMatrixParams(),
  };
}

/**
 * Drop selections that no longer name a node in the latest summary.
 * Called after every command response so the selection invariant holds.
 */
export function pruneSelection(state: ViewState, summary: SummaryGraph): void {
  const present = new Set(summary.nodes.map((n) => n.node_id));
  for (const id of [...state.selected]) {
    if (!present.has(id)) state.selected.delete(id);
  }
}
