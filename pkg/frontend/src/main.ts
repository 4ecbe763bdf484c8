/**
 * Browser entry point: wires the parameter panels, the 3D streamline
 * canvas, the community graph canvas and the matrix panel to the API
 * client.  The session id is kept in the URL hash so a reload rebuilds
 * the exact same view from the server.
 */

import { ApiClient, ApiError } from "./api.js";
import type { SummaryGraph } from "./api.js";
import { AmcsModel, decodeBase64, decodePpm } from "./amcs.js";
import { cssColor } from "./colors.js";
import { arcControlPoint, runLayout, splitGroups } from "./layout.js";
import type { LayoutNode } from "./layout.js";
import { kHint, validateDetectionParams, validateNeighborParams, MEASURES, OPACITY_TEMPLATES } from "./panels.js";
import { buildStrokes, defaultCamera } from "./scene.js";
import { initialState, pruneSelection } from "./state.js";

const state = initialState(localStorage.getItem("flowcomm.baseUrl") ?? "http://127.0.0.1:8080");
let api = new ApiClient(state.baseUrl);
let summary: SummaryGraph = { nodes: [], edges: [] };
let layout: LayoutNode[] = [];
let geometry: number[][][] = [];
let segmentColors: number[] = [];

function el<K extends keyof HTMLElementTagNameMap>(tag: K, attrs: Record<string, string> = {},
                                                   text = ""): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

function toast(message: string): void {
  const box = document.getElementById("toasts")!;
  const item = el("div", { class: "toast" }, message);
  box.appendChild(item);
  setTimeout(() => item.remove(), 6000);
}

function surface(err: unknown): void {
  if (err instanceof ApiError) toast(`${err.code}: ${err.message} ${err.detail}`.trim());
  else toast(String(err));
}

function canvas(id: string): CanvasRenderingContext2D {
  const c = document.getElementById(id) as HTMLCanvasElement;
  return c.getContext("2d")!;
}

function draw3d(): void {
  const ctx = canvas("view3d");
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  if (!state.camera || geometry.length === 0) return;
  const strokes = buildStrokes(geometry, segmentColors, state.selected,
                               state.camera, width, height, state.rendering.dimOpacity);
  for (const s of strokes) {
    ctx.globalAlpha = s.opacity;
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    s.points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
    ctx.stroke();
  }
  ctx.globalAlpha = 1;
}

function drawGraph(): void {
  const ctx = canvas("graph");
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  layout = runLayout(summary, { width, height });
  const byId = new Map(layout.map((n) => [n.id, n]));

  ctx.strokeStyle = "#999";
  for (const e of summary.edges) {
    const a = byId.get(e.a);
    const b = byId.get(e.b);
    if (!a || !b) continue;
    const c = arcControlPoint(a, b);
    ctx.lineWidth = 1 + Math.log2(1 + e.cross_edge_count);
    ctx.beginPath();
    ctx.moveTo(a.x, a.y);
    ctx.quadraticCurveTo(c.x, c.y, b.x, b.y);
    ctx.stroke();
  }
  ctx.lineWidth = 1;

  for (const [, members] of splitGroups(summary, layout)) {
    const xs = members.map((m) => m.x);
    const ys = members.map((m) => m.y);
    const pad = 12;
    ctx.setLineDash([6, 4]);
    ctx.strokeStyle = "#555";
    ctx.strokeRect(Math.min(...xs) - pad, Math.min(...ys) - pad,
                   Math.max(...xs) - Math.min(...xs) + 2 * pad,
                   Math.max(...ys) - Math.min(...ys) + 2 * pad);
    ctx.setLineDash([]);
  }

  for (const n of layout) {
    ctx.fillStyle = cssColor(n.id);
    ctx.beginPath();
    ctx.arc(n.x, n.y, n.radius, 0, 2 * Math.PI);
    ctx.fill();
    if (state.selected.has(n.id)) {
      ctx.strokeStyle = "#000";
      ctx.lineWidth = 2;
      ctx.stroke();
      ctx.lineWidth = 1;
    }
  }
}

async function drawMatrix(): Promise<void> {
  const ctx = canvas("matrix");
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  const node = [...state.selected][0];
  if (state.sessionId === null || node === undefined) {
    ctx.fillStyle = "#666";
    ctx.fillText("select a community to inspect its matrix", 10, 20);
    return;
  }
  const payload = await api.amcs(state.sessionId, node,
                                 { maxPixels: state.matrix.maxPixels,
                                   palette: state.matrix.palette, image: true });
  const model = new AmcsModel(payload);
  const header = document.getElementById("matrix-header")!;
  header.textContent = `community ${node}: ${model.n} segments, ` +
    (model.symmetric ? "symmetric" : "asymmetric");
  (header.style as CSSStyleDeclaration).color = cssColor(node);
  if (payload.image_ppm_base64) {
    const img = decodePpm(decodeBase64(payload.image_ppm_base64));
    const data = ctx.createImageData(img.width, img.height);
    for (let i = 0; i < img.width * img.height; i++) {
      data.data[4 * i] = img.pixels[3 * i];
      data.data[4 * i + 1] = img.pixels[3 * i + 1];
      data.data[4 * i + 2] = img.pixels[3 * i + 2];
      data.data[4 * i + 3] = 255;
    }
    ctx.putImageData(data, 0, 0);
  }
}

async function refreshAll(): Promise<void> {
  if (state.sessionId === null) return;
  summary = await api.summaryGraph(state.sessionId);
  pruneSelection(state, summary);
  segmentColors = (await api.colors(state.sessionId)).colors;
  drawGraph();
  draw3d();
  await drawMatrix();
}

async function upload(text: string): Promise<void> {
  const info = await api.uploadDataset(text);
  state.datasetId = info.dataset_id;
  geometry = (await api.geometry(info.dataset_id, info.n_segments > 200_000 ? 4 : 1)).streamlines;
  state.camera = defaultCamera(info.bbox[0], info.bbox[1],
                               (document.getElementById("view3d") as HTMLCanvasElement).width);
  document.getElementById("k-hint")!.textContent = kHint(info.n_segments).text;
  toast(`loaded ${info.n_streamlines} streamlines (${info.n_segments} segments)`);
}

async function detect(): Promise<void> {
  if (state.datasetId === null) throw new Error("upload a dataset first");
  for (const v of [validateNeighborParams(state.neighbor), validateDetectionParams(state.detection)]) {
    if (!v.ok) throw new Error(v.errors.join("; "));
  }
  const info = await api.createSession(state.datasetId, {
    neighbor: state.neighbor,
    detection: state.detection,
  });
  state.sessionId = info.session_id;
  location.hash = `session=${info.session_id}&dataset=${state.datasetId}`;
  toast(`${info.n_communities} communities, modularity ${info.modularity.toFixed(4)}`);
  await refreshAll();
}

async function command(cmd: Parameters<ApiClient["runCommand"]>[1]): Promise<void> {
  if (state.sessionId === null) return;
  await api.runCommand(state.sessionId, cmd);
  await refreshAll();
}

function buildPanels(): void {
  const panel = document.getElementById("panel")!;

  const file = el("input", { type: "file" });
  file.addEventListener("change", async () => {
    const f = file.files?.[0];
    if (f) await upload(await f.text()).catch(surface);
  });
  panel.append(el("h3", {}, "dataset"), file, el("div", { id: "k-hint" }));

  const strategy = el("select");
  for (const s of ["knn", "rbn"]) strategy.append(el("option", { value: s }, s));
  strategy.addEventListener("change", () => (state.neighbor.strategy = strategy.value as "knn" | "rbn"));
  const k = el("input", { type: "number", value: "10", min: "1" });
  k.addEventListener("change", () => (state.neighbor.k = parseInt(k.value, 10)));
  const measure = el("select");
  for (const m of MEASURES) measure.append(el("option", { value: m }, m));
  measure.value = "longest";
  measure.addEventListener("change", () => (state.neighbor.measure = measure.value as typeof MEASURES[number]));
  panel.append(el("h3", {}, "neighborhood"), strategy, k, measure);

  const resolution = el("input", { type: "number", value: "1.0", step: "0.1" });
  resolution.addEventListener("change", () => (state.detection.resolution = parseFloat(resolution.value)));
  const run = el("button", {}, "detect");
  run.addEventListener("click", () => detect().catch(surface));
  panel.append(el("h3", {}, "detection"), resolution, run);

  const template = el("select");
  template.append(el("option", { value: "" }, "no filter"));
  for (const t of OPACITY_TEMPLATES) template.append(el("option", { value: t }, t));
  template.addEventListener("change", () => {
    state.rendering.template = (template.value || null) as typeof state.rendering.template;
    draw3d();
  });
  panel.append(el("h3", {}, "rendering"), template);

  const split = el("button", {}, "split");
  split.addEventListener("click", () => {
    const node = [...state.selected][0];
    if (node !== undefined) command({ op: "split", node }).catch(surface);
  });
  const merge = el("button", {}, "merge");
  merge.addEventListener("click", () => {
    if (state.selected.size >= 2) command({ op: "merge", nodes: [...state.selected] }).catch(surface);
  });
  const collapse = el("button", {}, "collapse");
  collapse.addEventListener("click", () => {
    const node = [...state.selected][0];
    if (node !== undefined) command({ op: "collapse", node }).catch(surface);
  });
  panel.append(el("h3", {}, "refine"), split, merge, collapse);
}

function bindInteractions(): void {
  const graph = document.getElementById("graph") as HTMLCanvasElement;
  graph.addEventListener("click", (ev) => {
    const rect = graph.getBoundingClientRect();
    const x = ev.clientX - rect.left;
    const y = ev.clientY - rect.top;
    for (const n of layout) {
      if ((n.x - x) ** 2 + (n.y - y) ** 2 <= n.radius * n.radius) {
        if (ev.shiftKey) {
          state.selected.has(n.id) ? state.selected.delete(n.id) : state.selected.add(n.id);
        } else {
          state.selected = new Set([n.id]);
        }
        drawGraph();
        draw3d();
        drawMatrix().catch(surface);
        return;
      }
    }
  });

  const view = document.getElementById("view3d") as HTMLCanvasElement;
  let dragging = false;
  let last: [number, number] = [0, 0];
  view.addEventListener("mousedown", (ev) => {
    dragging = true;
    last = [ev.clientX, ev.clientY];
  });
  window.addEventListener("mouseup", () => (dragging = false));
  window.addEventListener("mousemove", (ev) => {
    if (!dragging || !state.camera) return;
    state.camera.yaw += (ev.clientX - last[0]) * 0.01;
    state.camera.pitch += (ev.clientY - last[1]) * 0.01;
    last = [ev.clientX, ev.clientY];
    draw3d();
  });
  view.addEventListener("wheel", (ev) => {
    if (!state.camera) return;
    state.camera.scale *= ev.deltaY < 0 ? 1.1 : 0.9;
    draw3d();
    ev.preventDefault();
  });
}

async function restoreFromHash(): Promise<void> {
  const params = new URLSearchParams(location.hash.slice(1));
  const session = params.get("session");
  const dataset = params.get("dataset");
  if (!session) return;
  state.sessionId = session;
  if (dataset) {
    state.datasetId = dataset;
    const info = await api.geometry(dataset);
    geometry = info.streamlines;
    const flat = geometry.flat();
    const lo = [0, 1, 2].map((i) => Math.min(...flat.map((p) => p[i])));
    const hi = [0, 1, 2].map((i) => Math.max(...flat.map((p) => p[i])));
    state.camera = defaultCamera(lo, hi, (document.getElementById("view3d") as HTMLCanvasElement).width);
  }
  await refreshAll();
}

export function start(): void {
  buildPanels();
  bindInteractions();
  api = new ApiClient(state.baseUrl);
  restoreFromHash().catch(surface);
}

if (typeof document !== "undefined" && document.getElementById("panel")) {
  start();
}
