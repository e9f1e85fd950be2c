"""Read-only HTTP service for the analyst UI.

Everything is precomputed at startup into an immutable snapshot (graph,
layouts for both projection modes, predictions from one designated model),
so request handling is pure lookups: concurrent readers need no locks and
repeated GETs return byte-identical JSON.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..bench import load_report_rows
from ..features import FeatureMatrix, assemble
from ..graph import LABEL_NAMES, TemporalGraph
from ..models import ModelArtifact, classify, predict
from .layout import LAYOUT_MODES, ProjectionLayout, build_layout
from .schemas import (
    ClassCounts,
    ErrorPayload,
    NeighborRef,
    SearchResponse,
    SliceEdge,
    SliceNode,
    SliceResponse,
    StatsResponse,
    TimestepsResponse,
    TxResponse,
)

SEARCH_CAP = 100
_CLASS_ORDER = ("illicit", "licit", "unknown")


@dataclass
class ServiceState:
    graph: TemporalGraph
    layouts: dict[str, ProjectionLayout]
    predicted: np.ndarray | None = None       # int8 predicted labels per node
    reports_dir: Path | None = None
    tx_strings: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.layouts:
            raise ValueError("service needs at least one layout")
        if not self.tx_strings:
            self.tx_strings = [str(int(t)) for t in self.graph.nodes.node_ids]


def build_state(
    graph: TemporalGraph,
    features: FeatureMatrix | None = None,
    artifact: ModelArtifact | None = None,
    reports_dir=None,
) -> ServiceState:
    """Precompute the immutable snapshot the endpoints serve from.

    Any model family supplies predictions; the activation layout additionally
    needs a (skip-)GCN, so other families serve the raw layout only.
    """
    if features is None:
        features = assemble(graph.nodes, "AF")
    layouts = {"raw": build_layout(graph, "raw", features)}
    predicted = None
    if artifact is not None:
        if artifact.family in ("gcn", "skip_gcn"):
            layouts["gcn"] = build_layout(graph, "gcn", features, artifact)
        predicted = classify(predict(artifact, features, graph))
    return ServiceState(
        graph=graph,
        layouts=layouts,
        predicted=predicted,
        reports_dir=Path(reports_dir) if reports_dir else None,
    )


def _not_found(detail: str) -> JSONResponse:
    return JSONResponse(
        status_code=404,
        content=ErrorPayload(error="not_found", detail=detail).model_dump(),
    )


def _bad_request(detail: str) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content=ErrorPayload(error="bad_request", detail=detail).model_dump(),
    )


def _label_name(value: int) -> str:
    return LABEL_NAMES[int(value)]


def _stats_for(state: ServiceState, t: int) -> StatsResponse:
    graph = state.graph
    sl = graph.slice(t)
    labels = sl.labels
    counts = ClassCounts(
        illicit=int(np.count_nonzero(labels == 1)),
        licit=int(np.count_nonzero(labels == 0)),
        unknown=int(np.count_nonzero(labels == -1)),
    )
    transfer = {a: {b: 0 for b in _CLASS_ORDER} for a in _CLASS_ORDER}
    for u, v in sl.edges:
        transfer[_label_name(graph.labels[u])][_label_name(graph.labels[v])] += 1
    return StatsResponse(
        time_step=t,
        node_count=int(sl.node_indices.size),
        edge_count=int(len(sl.edges)),
        class_counts=counts,
        transfer=transfer,
    )


def create_app(state: ServiceState, ui_dir=None) -> FastAPI:
    app = FastAPI(title="chronograph", version="0.1.0")
    graph = state.graph

    @app.get("/api/timesteps", response_model=TimestepsResponse)
    def timesteps():
        counts = [
            int(np.count_nonzero(graph.nodes.time_steps == t))
            for t in range(1, graph.num_steps + 1)
        ]
        return TimestepsResponse(
            count=graph.num_steps, min=1, max=graph.num_steps,
            per_step_node_counts=counts,
        )

    @app.get("/api/layouts")
    def layouts():
        return {
            "modes": sorted(state.layouts.keys()),
            "model_ref": next(
                (l.model_ref for l in state.layouts.values() if l.model_ref), None
            ),
        }

    @app.get("/api/slice/{t}", response_model=SliceResponse)
    def slice_view(t: int, layout: str = "raw"):
        if not 1 <= t <= graph.num_steps:
            return _not_found(f"time step {t} out of range 1..{graph.num_steps}")
        if layout not in LAYOUT_MODES:
            return _bad_request(f"unknown layout {layout!r}; choose from {sorted(LAYOUT_MODES)}")
        if layout not in state.layouts:
            return _bad_request(
                f"layout {layout!r} unavailable: no trained graph model loaded"
            )
        coords = state.layouts[layout].coords
        sl = graph.slice(t)
        nodes = []
        for i in sl.node_indices:
            i = int(i)
            nodes.append(
                SliceNode(
                    tx_id=int(graph.nodes.node_ids[i]),
                    x=float(coords[i, 0]),
                    y=float(coords[i, 1]),
                    label=_label_name(graph.labels[i]),
                    predicted=(
                        _label_name(state.predicted[i])
                        if state.predicted is not None
                        else None
                    ),
                    in_degree=int(graph.in_neighbors(i).size),
                    out_degree=int(graph.out_neighbors(i).size),
                )
            )
        edges = [
            SliceEdge(
                source=int(graph.nodes.node_ids[u]),
                target=int(graph.nodes.node_ids[v]),
            )
            for u, v in sl.edges
        ]
        return SliceResponse(
            time_step=t, layout=layout, nodes=nodes, edges=edges,
            stats=_stats_for(state, t),
        )

    @app.get("/api/tx/{tx_id}", response_model=TxResponse)
    def tx_detail(tx_id: int):
        idx = graph.id_to_index.get(tx_id)
        if idx is None:
            return _not_found(f"unknown txId {tx_id}")
        neighbors = [
            NeighborRef(
                tx_id=int(graph.nodes.node_ids[j]),
                direction="in",
                label=_label_name(graph.labels[j]),
            )
            for j in sorted(int(j) for j in graph.in_neighbors(idx))
        ] + [
            NeighborRef(
                tx_id=int(graph.nodes.node_ids[j]),
                direction="out",
                label=_label_name(graph.labels[j]),
            )
            for j in sorted(int(j) for j in graph.out_neighbors(idx))
        ]
        return TxResponse(
            tx_id=tx_id,
            time_step=int(graph.nodes.time_steps[idx]),
            label=_label_name(graph.labels[idx]),
            predicted=(
                _label_name(state.predicted[idx]) if state.predicted is not None else None
            ),
            features_preview=[float(v) for v in graph.nodes.features[idx, :10]],
            neighbors=neighbors,
        )

    @app.get("/api/search", response_model=SearchResponse)
    def search(q: str = ""):
        if not q:
            return SearchResponse(query=q, total_matched=0, tx_ids=[])
        hits = [
            int(graph.nodes.node_ids[i])
            for i, s in enumerate(state.tx_strings)
            if q in s
        ]
        hits.sort()
        return SearchResponse(query=q, total_matched=len(hits), tx_ids=hits[:SEARCH_CAP])

    @app.get("/api/stats/{t}", response_model=StatsResponse)
    def stats(t: int):
        if not 1 <= t <= graph.num_steps:
            return _not_found(f"time step {t} out of range 1..{graph.num_steps}")
        return _stats_for(state, t)

    @app.get("/api/experiments")
    def experiments():
        if state.reports_dir is None:
            return {"rows": []}
        return {"rows": load_report_rows(state.reports_dir.parent
                                         if state.reports_dir.name == "reports"
                                         else state.reports_dir)}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:
        @app.get("/")
        def root():
            return {"service": "chronograph", "api": "/api", "ui": "not bundled"}

    return app


def serve(
    state: ServiceState,
    host: str = "127.0.0.1",
    port: int = 8640,
    ui_dir=None,
) -> None:
    import uvicorn

    app = create_app(state, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
