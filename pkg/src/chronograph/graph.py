"""Immutable temporal transaction graph and its three-file CSV schema.

Files:
  features: headerless CSV ``txId,ts,f2,...`` -- the time step is the first
            feature column; all remaining columns are real-valued.
  edges:    CSV with header ``txId1,txId2`` (directed payment flows).
  classes:  CSV with header ``txId,class`` where class is "1" (illicit),
            "2" (licit) or "unknown". Nodes absent from this file are unknown.

Node ids are remapped to contiguous indices in file order; original ids are
kept for search and display. Edges never cross time steps, so every time step
is an independent snapshot.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

LICIT = 0
ILLICIT = 1
UNKNOWN = -1

LABEL_NAMES = {ILLICIT: "illicit", LICIT: "licit", UNKNOWN: "unknown"}
CLASS_TOKENS = {"1": ILLICIT, "2": LICIT, "unknown": UNKNOWN}

DEFAULT_LOCAL_COUNT = 94
DEFAULT_TOTAL_COUNT = 166


class ParseError(ValueError):
    """Malformed input file; message carries the 1-based line number."""


class IntegrityError(ValueError):
    """Referential or structural violation between the three files."""


@dataclass(frozen=True)
class NodeTable:
    node_ids: np.ndarray        # original 64-bit ids, file order
    time_steps: np.ndarray      # int per node, 1..T
    features: np.ndarray        # N x total_count, float64; column 0 is the time step
    local_count: int
    total_count: int

    def __post_init__(self):
        n, f = self.features.shape
        if f != self.total_count:
            raise ValueError(f"feature matrix has {f} columns, expected {self.total_count}")
        if not 1 <= self.local_count <= self.total_count:
            raise ValueError("local_count must be within 1..total_count")
        if len(self.node_ids) != n or len(self.time_steps) != n:
            raise ValueError("node_ids/time_steps length mismatch")
        if len(np.unique(self.node_ids)) != n:
            raise ValueError("node ids must be unique")
        if not np.array_equal(self.features[:, 0].astype(np.int64), self.time_steps):
            raise ValueError("first feature column must equal the time step")

    def __len__(self) -> int:
        return len(self.node_ids)


@dataclass(frozen=True)
class GraphSlice:
    t: int
    node_indices: np.ndarray    # graph indices, ascending
    edges: np.ndarray           # E_t x 2 graph-index pairs within the slice
    labels: np.ndarray
    features: np.ndarray


@dataclass
class ValidationReport:
    node_count: int
    edge_count: int
    illicit_count: int
    licit_count: int
    unknown_count: int
    time_step_count: int
    per_step_node_counts: list[int]
    cross_step_edge_count: int
    components_per_step: list[int]
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "edge_count": self.edge_count,
            "illicit_count": self.illicit_count,
            "licit_count": self.licit_count,
            "unknown_count": self.unknown_count,
            "time_step_count": self.time_step_count,
            "per_step_node_counts": self.per_step_node_counts,
            "cross_step_edge_count": self.cross_step_edge_count,
            "components_per_step": self.components_per_step,
            "warnings": self.warnings,
        }


class TemporalGraph:
    """Time-sliced directed transaction graph; immutable once built.

    ``slice_access_counts`` records which time steps have been sliced; tests
    use it to prove that training never touches test-step data.
    """

    def __init__(
        self,
        nodes: NodeTable,
        edges: np.ndarray,
        labels: np.ndarray,
        warnings: list[str] | None = None,
    ):
        self.nodes = nodes
        self.edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.labels = np.asarray(labels, dtype=np.int8)
        self.warnings = list(warnings or [])
        n = len(nodes)
        if len(self.labels) != n:
            raise ValueError("labels length mismatch")
        if self.edges.size and (self.edges.min() < 0 or self.edges.max() >= n):
            raise IntegrityError("edge endpoint index out of range")

        self.id_to_index: dict[int, int] = {
            int(tx): i for i, tx in enumerate(nodes.node_ids)
        }
        ts = nodes.time_steps
        self.num_steps = int(ts.max()) if n else 0
        self._slices: dict[int, np.ndarray] = {
            t: np.flatnonzero(ts == t) for t in range(1, self.num_steps + 1)
        }
        # CSR-style adjacency in both orientations.
        self._out_order = np.lexsort((self.edges[:, 1], self.edges[:, 0]))
        self._in_order = np.lexsort((self.edges[:, 0], self.edges[:, 1]))
        self._out_indptr = np.zeros(n + 1, dtype=np.int64)
        self._in_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.edges[:, 0], minlength=n), out=self._out_indptr[1:])
        np.cumsum(np.bincount(self.edges[:, 1], minlength=n), out=self._in_indptr[1:])
        self.slice_access_counts: Counter[int] = Counter()

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def out_neighbors(self, i: int) -> np.ndarray:
        rows = self._out_order[self._out_indptr[i] : self._out_indptr[i + 1]]
        return self.edges[rows, 1]

    def in_neighbors(self, i: int) -> np.ndarray:
        rows = self._in_order[self._in_indptr[i] : self._in_indptr[i + 1]]
        return self.edges[rows, 0]

    def slice(self, t: int) -> GraphSlice:
        """Induced snapshot for time step ``t`` (1-based)."""
        if not 1 <= t <= self.num_steps:
            raise IndexError(f"time step {t} out of range 1..{self.num_steps}")
        self.slice_access_counts[t] += 1
        idx = self._slices[t]
        if self.edges.size:
            in_slice = self.nodes.time_steps[self.edges[:, 0]] == t
            slice_edges = self.edges[in_slice]
            # Keep only edges fully inside the slice (cross-step edges are
            # rejected at ingest but hand-built graphs may carry them).
            keep = self.nodes.time_steps[slice_edges[:, 1]] == t
            slice_edges = slice_edges[keep]
        else:
            slice_edges = np.empty((0, 2), dtype=np.int64)
        return GraphSlice(
            t=t,
            node_indices=idx,
            edges=slice_edges,
            labels=self.labels[idx],
            features=self.nodes.features[idx],
        )

    def reset_access_counts(self) -> None:
        self.slice_access_counts.clear()


def build_graph(
    node_ids,
    time_steps,
    features,
    edges,
    labels,
    local_count: int | None = None,
    warnings: list[str] | None = None,
) -> TemporalGraph:
    """Assemble a TemporalGraph from in-memory arrays (synthetic data, tests)."""
    features = np.asarray(features, dtype=np.float64)
    total = features.shape[1]
    if local_count is None:
        local_count = DEFAULT_LOCAL_COUNT if total == DEFAULT_TOTAL_COUNT else total
    nodes = NodeTable(
        node_ids=np.asarray(node_ids, dtype=np.int64),
        time_steps=np.asarray(time_steps, dtype=np.int64),
        features=features,
        local_count=local_count,
        total_count=total,
    )
    return TemporalGraph(nodes, np.asarray(edges, dtype=np.int64).reshape(-1, 2),
                         labels, warnings)


def _parse_line_number(exc: Exception) -> int | None:
    m = re.search(r"line (\d+)", str(exc))
    return int(m.group(1)) if m else None


def _locate_bad_feature_row(path: Path) -> tuple[int, str]:
    """Slow scan used only on the error path to name the offending line."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\r\n").split(",")
            for tok in parts[1:]:
                try:
                    v = float(tok)
                except ValueError:
                    return lineno, tok
                if not np.isfinite(v):
                    return lineno, tok
    return 0, "?"


def ingest(
    features_path,
    edges_path,
    classes_path,
    local_count: int | None = None,
) -> TemporalGraph:
    """Read the three-file schema into a validated TemporalGraph.

    Deterministic: the same bytes always produce bit-identical structures.
    """
    features_path = Path(features_path)
    edges_path = Path(edges_path)
    classes_path = Path(classes_path)

    try:
        # round_trip parsing keeps export -> ingest bit-identical.
        feats = pd.read_csv(features_path, header=None, float_precision="round_trip")
    except pd.errors.ParserError as exc:
        line = _parse_line_number(exc)
        raise ParseError(
            f"{features_path}: malformed row"
            + (f" at line {line}" if line else "")
            + f": {exc}"
        ) from exc
    if feats.shape[1] < 2:
        raise ParseError(f"{features_path}: need at least txId and time step columns")
    value_cols = feats.iloc[:, 1:]
    numeric = value_cols.apply(pd.to_numeric, errors="coerce").to_numpy(np.float64)
    if not np.all(np.isfinite(numeric)):
        lineno, tok = _locate_bad_feature_row(features_path)
        raise ParseError(
            f"{features_path}: non-numeric feature value {tok!r} at line {lineno}"
        )
    try:
        node_ids = pd.to_numeric(feats.iloc[:, 0], errors="raise").astype(np.int64).to_numpy()
    except (ValueError, TypeError) as exc:
        raise ParseError(f"{features_path}: non-integer txId column: {exc}") from exc

    dup_ids, dup_counts = np.unique(node_ids, return_counts=True)
    if np.any(dup_counts > 1):
        dup = int(dup_ids[np.argmax(dup_counts > 1)])
        raise IntegrityError(f"{features_path}: duplicate txId {dup}")

    time_steps = numeric[:, 0]
    if not np.array_equal(time_steps, np.round(time_steps)) or time_steps.min() < 1:
        raise ParseError(f"{features_path}: time step column must hold integers >= 1")
    time_steps = time_steps.astype(np.int64)

    total = numeric.shape[1]
    if local_count is None:
        local_count = DEFAULT_LOCAL_COUNT if total == DEFAULT_TOTAL_COUNT else total

    nodes = NodeTable(
        node_ids=node_ids,
        time_steps=time_steps,
        features=numeric,
        local_count=local_count,
        total_count=total,
    )
    warnings: list[str] = []
    id_order = np.argsort(node_ids, kind="stable")
    sorted_ids = node_ids[id_order]

    def ids_to_indices(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map txIds to node indices; second array flags misses."""
        pos = np.searchsorted(sorted_ids, values)
        pos_safe = np.minimum(pos, len(sorted_ids) - 1)
        missing = sorted_ids[pos_safe] != values
        return id_order[pos_safe], missing

    edges_df = pd.read_csv(edges_path)
    if list(edges_df.columns[:2]) != ["txId1", "txId2"]:
        raise ParseError(f"{edges_path}: expected header 'txId1,txId2'")
    src_ids = edges_df["txId1"].to_numpy(np.int64)
    dst_ids = edges_df["txId2"].to_numpy(np.int64)
    src_idx, src_missing = ids_to_indices(src_ids)
    dst_idx, dst_missing = ids_to_indices(dst_ids)
    bad = src_missing | dst_missing
    if np.any(bad):
        k = int(np.argmax(bad))
        raise IntegrityError(
            f"{edges_path}: edge ({src_ids[k]}, {dst_ids[k]}) references txId "
            "missing from features file"
        )
    edge_list = np.column_stack([src_idx, dst_idx])
    if edge_list.size:
        if np.any(edge_list[:, 0] == edge_list[:, 1]):
            bad = edge_list[edge_list[:, 0] == edge_list[:, 1]][0, 0]
            raise IntegrityError(
                f"{edges_path}: self-loop on txId {int(node_ids[bad])}"
            )
        cross = time_steps[edge_list[:, 0]] != time_steps[edge_list[:, 1]]
        if np.any(cross):
            u, v = edge_list[cross][0]
            raise IntegrityError(
                f"{edges_path}: edge ({int(node_ids[u])}, {int(node_ids[v])}) "
                "connects different time steps"
            )
        deduped = np.unique(edge_list, axis=0)
        if len(deduped) != len(edge_list):
            warnings.append(
                f"collapsed {len(edge_list) - len(deduped)} duplicate edges"
            )
            edge_list = deduped

    classes_df = pd.read_csv(classes_path, dtype={"txId": np.int64, "class": str})
    if list(classes_df.columns[:2]) != ["txId", "class"]:
        raise ParseError(f"{classes_path}: expected header 'txId,class'")
    labels = np.full(len(nodes), UNKNOWN, dtype=np.int8)
    class_ids = classes_df["txId"].to_numpy(np.int64)
    tokens = classes_df["class"].astype(str).str.strip()
    known = tokens.isin(list(CLASS_TOKENS)).to_numpy()
    if not np.all(known):
        k = int(np.argmax(~known))
        raise ParseError(
            f"{classes_path}: unknown class token {tokens.iloc[k]!r} for txId {class_ids[k]}"
        )
    class_values = tokens.map(CLASS_TOKENS).to_numpy(np.int8)
    class_idx, class_missing = ids_to_indices(class_ids)
    if np.any(class_missing):
        warnings.append(
            f"ignored {int(class_missing.sum())} class rows with txIds not in features file"
        )
    labels[class_idx[~class_missing]] = class_values[~class_missing]

    return TemporalGraph(nodes, edge_list, labels, warnings)


def validate(graph: TemporalGraph) -> ValidationReport:
    """Pure analysis pass: counts, cross-step edges, per-step components."""
    labels = graph.labels
    ts = graph.nodes.time_steps
    per_step = [int(np.count_nonzero(ts == t)) for t in range(1, graph.num_steps + 1)]
    cross = 0
    if graph.edges.size:
        cross = int(np.count_nonzero(ts[graph.edges[:, 0]] != ts[graph.edges[:, 1]]))

    warnings = list(graph.warnings)
    components = []
    for t in range(1, graph.num_steps + 1):
        idx = graph._slices[t]
        count = _component_count(graph, idx, t)
        components.append(count)
        if count > 1:
            warnings.append(f"time step {t} has {count} connected components")

    return ValidationReport(
        node_count=graph.num_nodes,
        edge_count=graph.num_edges,
        illicit_count=int(np.count_nonzero(labels == ILLICIT)),
        licit_count=int(np.count_nonzero(labels == LICIT)),
        unknown_count=int(np.count_nonzero(labels == UNKNOWN)),
        time_step_count=int(len(np.unique(ts))) if graph.num_nodes else 0,
        per_step_node_counts=per_step,
        cross_step_edge_count=cross,
        components_per_step=components,
        warnings=warnings,
    )


def _component_count(graph: TemporalGraph, idx: np.ndarray, t: int) -> int:
    """Union-find over the undirected view of one slice."""
    if idx.size == 0:
        return 0
    local = {int(g): k for k, g in enumerate(idx)}
    parent = np.arange(idx.size)

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    ts = graph.nodes.time_steps
    if graph.edges.size:
        mask = (ts[graph.edges[:, 0]] == t) & (ts[graph.edges[:, 1]] == t)
        for u, v in graph.edges[mask]:
            ra, rb = find(local[int(u)]), find(local[int(v)])
            if ra != rb:
                parent[ra] = rb
    return int(sum(1 for k in range(idx.size) if find(k) == k))


def graph_slice(graph: TemporalGraph, t: int) -> GraphSlice:
    return graph.slice(t)


def _format_float(v: float) -> str:
    # repr round-trips float64 exactly, so export -> ingest is lossless.
    v = float(v)
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def export_csv(graph: TemporalGraph, out_dir) -> dict[str, Path]:
    """Write the graph back to the three-file schema (round-trip safe)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "features": out_dir / "features.csv",
        "edges": out_dir / "edges.csv",
        "classes": out_dir / "classes.csv",
    }
    with open(paths["features"], "w", encoding="utf-8", newline="\n") as fh:
        for i in range(graph.num_nodes):
            row = graph.nodes.features[i]
            fh.write(str(int(graph.nodes.node_ids[i])))
            fh.write(",")
            fh.write(",".join(_format_float(v) for v in row))
            fh.write("\n")
    with open(paths["edges"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("txId1,txId2\n")
        for u, v in graph.edges:
            fh.write(
                f"{int(graph.nodes.node_ids[u])},{int(graph.nodes.node_ids[v])}\n"
            )
    token_of = {ILLICIT: "1", LICIT: "2", UNKNOWN: "unknown"}
    with open(paths["classes"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("txId,class\n")
        for i in range(graph.num_nodes):
            fh.write(f"{int(graph.nodes.node_ids[i])},{token_of[int(graph.labels[i])]}\n")
    return paths
