"""HTTP/JSON service exposing datasets, sessions and analysis views."""

from __future__ import annotations

import base64
import itertools
import threading

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import model
from .amcs import build_amcs, rasterize_amcs
from .community import LouvainConfig
from .errors import FlowError
from .metrics import weighted_jaccard
from .neighbors import NeighborQueryConfig, default_rbn_radius
from .session import Session, create_session

_HTTP_STATUS = {"bad_request": 400, "not_found": 404, "conflict": 409,
                "too_large": 413, "internal": 500}


class _ApiError(Exception):
    def __init__(self, code: str, message: str, detail: str = ""):
        self.code, self.message, self.detail = code, message, detail


def _error_response(code: str, message: str, detail: str = "") -> JSONResponse:
    return JSONResponse(status_code=_HTTP_STATUS.get(code, 500),
                        content={"code": code, "message": message, "detail": detail})


class AppState:
    def __init__(self, size_cap: int = 512 * 1024 * 1024):
        self.datasets: dict[str, model.StreamlineSet] = {}
        self.sessions: dict[str, Session] = {}
        self.size_cap = size_cap
        self._ids = itertools.count()
        self._lock = threading.Lock()

    def new_id(self, prefix: str) -> str:
        with self._lock:
            return f"{prefix}-{next(self._ids)}"


def create_app(state: AppState | None = None, cors_origin: str | None = None) -> FastAPI:
    app = FastAPI(title="flowcomm")
    st = state or AppState()
    app.state.store = st

    if cors_origin:
        app.add_middleware(CORSMiddleware, allow_origins=[cors_origin],
                           allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(FlowError)
    async def flow_error_handler(_req, exc: FlowError):
        return _error_response(exc.code, type(exc).__name__, str(exc))

    @app.exception_handler(_ApiError)
    async def api_error_handler(_req, exc: _ApiError):
        return _error_response(exc.code, exc.message, exc.detail)

    def get_dataset(dataset_id: str) -> model.StreamlineSet:
        ds = st.datasets.get(dataset_id)
        if ds is None:
            raise _ApiError("not_found", f"unknown dataset {dataset_id!r}")
        return ds

    def get_session(session_id: str) -> Session:
        s = st.sessions.get(session_id)
        if s is None:
            raise _ApiError("not_found", f"unknown session {session_id!r}")
        return s

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    @app.post("/datasets")
    async def upload_dataset(request: Request,
                             format: str = Query("json"),
                             resample_spacing: float | None = Query(None),
                             min_segments: int | None = Query(None)):
        body = await request.body()
        if len(body) > st.size_cap:
            raise _ApiError("too_large", "payload exceeds the configured size cap")
        sset = model.load_streamlines(body, format=format)
        if resample_spacing is not None:
            sset = model.resample_uniform(sset, resample_spacing)
        if min_segments is not None:
            sset = model.filter_short(sset, min_segments)
        dataset_id = st.new_id("ds")
        st.datasets[dataset_id] = sset
        lo, hi = sset.bounding_box
        return {"dataset_id": dataset_id,
                "n_streamlines": sset.n_streamlines,
                "n_segments": sset.n_segments,
                "dropped_streamlines": sset.dropped_streamlines,
                "bbox": [lo.tolist(), hi.tolist()]}

    @app.post("/datasets/{dataset_id}/sessions")
    async def new_session(dataset_id: str, body: dict):
        sset = get_dataset(dataset_id)
        nb = body.get("neighbor", {})
        strategy = nb.get("strategy", "knn")
        radius = nb.get("radius")
        if strategy == "rbn" and radius is None:
            radius = default_rbn_radius(sset)
        neighbor_config = NeighborQueryConfig(strategy, nb.get("k", 10), radius,
                                              nb.get("measure", "longest"))
        dt = body.get("detection", {})
        detection_config = LouvainConfig(resolution=dt.get("resolution", 1.0),
                                         seed=dt.get("seed", 0))
        variant = body.get("variant", "streamline")
        levels = tuple(body.get("levels", ["segment", "streamline"]))
        session_id = st.new_id("sess")
        session = create_session(sset, neighbor_config, detection_config,
                                 variant=variant, levels=levels,
                                 session_id=session_id)
        session.dataset_id = dataset_id
        st.sessions[session_id] = session
        return {"session_id": session_id,
                "n_communities": session.root_partition.n_communities,
                "modularity": session.root_partition.modularity,
                "level": session.level}

    @app.post("/sessions/{session_id}/commands")
    async def run_command(session_id: str, body: dict):
        session = get_session(session_id)
        result = session.apply_command(body)
        summary = session.summary_graph()
        payload = {"nodes": summary.nodes, "edges": summary.edges}
        if isinstance(result, list):
            payload["children"] = result
        elif isinstance(result, int):
            payload["merged"] = result
        return payload

    @app.get("/sessions/{session_id}/summary_graph")
    async def summary_graph(session_id: str):
        summary = get_session(session_id).summary_graph()
        return {"nodes": summary.nodes, "edges": summary.edges}

    @app.get("/sessions/{session_id}/colors")
    async def colors(session_id: str):
        session = get_session(session_id)
        return {"level": "segment", "colors": session.element_colors().tolist()}

    @app.get("/sessions/{session_id}/amcs")
    async def amcs_view(session_id: str, node: int, max_pixels: int = 512,
                        palette: str = "gray", image: bool = False):
        session = get_session(session_id)
        g = session.csngs.get("segment")
        if g is None:
            raise _ApiError("bad_request", "session has no segment-level CSNG")
        members = session.leaf_segment_members(node)
        m = build_amcs(g, members, session.dataset)
        payload = m.to_json()
        if image:
            ppm = rasterize_amcs(m, max_pixels=max_pixels, palette=palette)
            payload["image_ppm_base64"] = base64.b64encode(ppm).decode()
        return payload

    @app.get("/datasets/{dataset_id}/geometry")
    async def geometry(dataset_id: str, decimate: int = 1):
        sset = get_dataset(dataset_id)
        if decimate < 1:
            raise _ApiError("bad_request", "decimate must be >= 1")
        lines = []
        for i in range(sset.n_streamlines):
            pts = sset.line_points(i)
            kept = pts[::decimate]
            if not np.array_equal(kept[-1], pts[-1]):
                kept = np.concatenate((kept, pts[-1:]))
            lines.append(kept.tolist())
        return {"streamlines": lines}

    @app.get("/sessions/{session_id}/metrics")
    async def metrics_view(session_id: str, labels: str = "dataset"):
        session = get_session(session_id)
        if labels != "dataset":
            raise _ApiError("bad_request", "only labels=dataset is supported")
        truth = session.dataset.labels
        if truth is None:
            raise _ApiError("bad_request", "dataset has no ground-truth labels")
        p, _ = session.leaf_partition()
        if session.level == "segment":
            truth = truth[session.dataset.seg_line]
        return {"weighted_jaccard": weighted_jaccard(p, truth),
                "n_communities": p.n_communities}

    return app
