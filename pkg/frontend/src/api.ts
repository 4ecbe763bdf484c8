/**
 * Typed client for the analysis service.
 *
 * Every mutation goes through this module so the browser never holds
 * authoritative state: a page reload can always rebuild the view from the
 * session id alone.  Commands for a given session are queued client side,
 * matching the server's single-writer contract; reads may overlap freely.
 */

export interface DatasetInfo {
  dataset_id: string;
  n_streamlines: number;
  n_segments: number;
  dropped_streamlines: number;
  bbox: [number[], number[]];
}

export interface NeighborParams {
  strategy: "knn" | "rbn";
  k?: number;
  radius?: number | null;
  measure?: "shortest" | "average" | "longest";
}

export interface DetectionParams {
  resolution?: number;
  seed?: number;
}

export interface SessionRequest {
  neighbor?: NeighborParams;
  detection?: DetectionParams;
  variant?: "segment" | "subcurve" | "streamline";
  levels?: string[];
}

export interface SessionInfo {
  session_id: string;
  n_communities: number;
  modularity: number;
  level: string;
}

export interface SummaryNode {
  node_id: number;
  size: number;
  origin: string;
  parent_group: number | null;
  isolation: number;
  internal_density: number;
  mean_neighbor_distance: number;
}

export interface SummaryEdge {
  a: number;
  b: number;
  cross_edge_count: number;
}

export interface SummaryGraph {
  nodes: SummaryNode[];
  edges: SummaryEdge[];
}

export interface CommandResult extends SummaryGraph {
  children?: number[];
  merged?: number;
}

export type SessionCommand =
  | { op: "split"; node: number; resolution?: number; seed?: number; level?: string }
  | { op: "merge"; nodes: number[] }
  | { op: "collapse"; node: number };

export interface ColorsPayload {
  level: string;
  colors: number[];
}

export interface AmcsPayload {
  n: number;
  symmetric: boolean;
  ordering: number[];
  entries: [number, number][];
  group_bounds: number[];
  image_ppm_base64?: string;
}

export interface GeometryPayload {
  streamlines: number[][][];
}

export interface MetricsPayload {
  weighted_jaccard: number;
  n_communities: number;
}

/** Error body the service returns for every non-2xx response. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
    public readonly detail: string = "",
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function raiseForStatus(res: Response): Promise<void> {
  if (res.ok) return;
  let code = "internal";
  let message = res.statusText || `HTTP ${res.status}`;
  let detail = "";
  try {
    const body = await res.json();
    if (body && typeof body.code === "string") {
      code = body.code;
      message = body.message ?? message;
      detail = body.detail ?? "";
    }
  } catch {
    // non-JSON error body, keep the status text
  }
  throw new ApiError(res.status, code, message, detail);
}

export class ApiClient {
  private readonly fetchImpl: FetchLike;
  private readonly pending = new Map<string, Promise<unknown>>();

  constructor(
    public readonly baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path);
    await raiseForStatus(res);
    return (await res.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    await raiseForStatus(res);
    return (await res.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.getJson("/health");
  }

  uploadDataset(
    payload: string,
    opts: { format?: string; resampleSpacing?: number; minSegments?: number } = {},
  ): Promise<DatasetInfo> {
    const q = new URLSearchParams({ format: opts.format ?? "json" });
    if (opts.resampleSpacing !== undefined) {
      q.set("resample_spacing", String(opts.resampleSpacing));
    }
    if (opts.minSegments !== undefined) {
      q.set("min_segments", String(opts.minSegments));
    }
    return this.fetchImpl(`${this.baseUrl}/datasets?${q}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: payload,
    }).then(async (res) => {
      await raiseForStatus(res);
      return (await res.json()) as DatasetInfo;
    });
  }

  createSession(datasetId: string, req: SessionRequest): Promise<SessionInfo> {
    return this.postJson(`/datasets/${datasetId}/sessions`, req);
  }

  /**
   * Queue a refinement command.  Commands for the same session are chained
   * so at most one is in flight, preserving the order the user issued them.
   */
  runCommand(sessionId: string, cmd: SessionCommand): Promise<CommandResult> {
    const prior = this.pending.get(sessionId) ?? Promise.resolve();
    const next = prior
      .catch(() => undefined) // a failed command must not wedge the queue
      .then(() => this.postJson<CommandResult>(`/sessions/${sessionId}/commands`, cmd));
    this.pending.set(sessionId, next);
    return next;
  }

  summaryGraph(sessionId: string): Promise<SummaryGraph> {
    return this.getJson(`/sessions/${sessionId}/summary_graph`);
  }

  colors(sessionId: string): Promise<ColorsPayload> {
    return this.getJson(`/sessions/${sessionId}/colors`);
  }

  amcs(
    sessionId: string,
    node: number,
    opts: { maxPixels?: number; palette?: string; image?: boolean } = {},
  ): Promise<AmcsPayload> {
    const q = new URLSearchParams({ node: String(node) });
    if (opts.maxPixels !== undefined) q.set("max_pixels", String(opts.maxPixels));
    if (opts.palette !== undefined) q.set("palette", opts.palette);
    if (opts.image) q.set("image", "true");
    return this.getJson(`/sessions/${sessionId}/amcs?${q}`);
  }

  geometry(datasetId: string, decimate = 1): Promise<GeometryPayload> {
    return this.getJson(`/datasets/${datasetId}/geometry?decimate=${decimate}`);
  }

  metrics(sessionId: string): Promise<MetricsPayload> {
    return this.getJson(`/sessions/${sessionId}/metrics`);
  }
}
