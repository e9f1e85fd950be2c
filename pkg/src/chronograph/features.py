"""Neighbor-statistic aggregation and feature-set assembly.

The one-hop aggregates mirror how the shipped transaction features were
built: per node, per direction, a statistic of each chosen local feature over
the in- (or out-) neighborhood, plus an explicit neighbor count per direction
so models can tell "no neighbors" from "statistic equals zero". Used for
synthetic data and property tests; the production release already ships its
aggregated columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import NodeTable, TemporalGraph

STATISTICS = ("min", "max", "mean", "std")
DIRECTIONS = ("in", "out")


@dataclass(frozen=True)
class AggregateConfig:
    statistics: tuple[str, ...] = STATISTICS
    directions: tuple[str, ...] = DIRECTIONS
    source_columns: tuple[int, ...] = (0,)

    def __post_init__(self):
        if not self.statistics or not self.directions or not self.source_columns:
            raise ValueError("statistics, directions and source_columns must be non-empty")
        bad = [s for s in self.statistics if s not in STATISTICS]
        if bad:
            raise ValueError(f"unknown statistics {bad}; choose from {STATISTICS}")
        bad = [d for d in self.directions if d not in DIRECTIONS]
        if bad:
            raise ValueError(f"unknown directions {bad}; choose from {DIRECTIONS}")


@dataclass
class FeatureMatrix:
    """Dense feature table with per-column provenance.

    ``take(indices)`` is the only sanctioned row access for model code; it
    records the requested indices so tests can audit which nodes a training
    run actually read.
    """

    values: np.ndarray
    provenance: tuple[str, ...]
    column_names: tuple[str, ...]
    access_log: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("feature matrix must be 2-D")
        if len(self.provenance) != self.values.shape[1]:
            raise ValueError("provenance must tag every column")
        if len(self.column_names) != self.values.shape[1]:
            raise ValueError("column_names must name every column")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def take(self, indices) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        self.access_log.append(indices.copy())
        return self.values[indices]

    def accessed_rows(self) -> np.ndarray:
        if not self.access_log:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(self.access_log))

    def reset_access_log(self) -> None:
        self.access_log.clear()


def _direction_stats(
    n: int,
    src: np.ndarray,
    dst: np.ndarray,
    values: np.ndarray,
    statistics: tuple[str, ...],
) -> tuple[np.ndarray, np.ndarray]:
    """Statistics of ``values[src, col]`` grouped by ``dst``, one col at a time.

    Edges are sorted canonically by (dst, src) first, so results do not depend
    on input edge order. Empty groups yield 0 for every statistic.
    """
    order = np.lexsort((src, dst))
    src = src[order]
    dst = dst[order]
    counts = np.bincount(dst, minlength=n).astype(np.float64)
    cols = []
    for col_values in values.T:
        vals = col_values[src]
        sums = np.bincount(dst, weights=vals, minlength=n)
        out = {}
        if "min" in statistics:
            mn = np.full(n, np.inf)
            np.minimum.at(mn, dst, vals)
            out["min"] = np.where(counts > 0, mn, 0.0)
        if "max" in statistics:
            mx = np.full(n, -np.inf)
            np.maximum.at(mx, dst, vals)
            out["max"] = np.where(counts > 0, mx, 0.0)
        mean = np.divide(sums, counts, out=np.zeros(n), where=counts > 0)
        if "mean" in statistics:
            out["mean"] = mean
        if "std" in statistics:
            sumsq = np.bincount(dst, weights=vals * vals, minlength=n)
            # Sample variance with n-1 denominator; 0 when fewer than 2 neighbors.
            var = np.zeros(n)
            enough = counts > 1
            var[enough] = (sumsq[enough] - counts[enough] * mean[enough] ** 2) / (
                counts[enough] - 1.0
            )
            out["std"] = np.sqrt(np.maximum(var, 0.0))
        cols.append(np.column_stack([out[s] for s in statistics]))
    return np.hstack(cols), counts


def aggregate_neighbor_stats(
    graph: TemporalGraph, config: AggregateConfig
) -> FeatureMatrix:
    """One-hop neighbor statistics per node, direction-major column layout.

    Column order: for each direction, for each source column, for each
    statistic; then one neighbor-count column per direction.
    """
    local = graph.nodes.local_count
    bad = [c for c in config.source_columns if not 0 <= c < local]
    if bad:
        raise ValueError(f"source columns {bad} outside local feature range 0..{local - 1}")
    n = graph.num_nodes
    values = graph.nodes.features[:, list(config.source_columns)]
    src, dst = (
        (graph.edges[:, 0], graph.edges[:, 1])
        if graph.edges.size
        else (np.empty(0, np.int64), np.empty(0, np.int64))
    )

    blocks = []
    names: list[str] = []
    count_cols = []
    for direction in config.directions:
        # "in" aggregates over nodes paying INTO each node, i.e. edge sources
        # grouped by target; "out" is the reverse.
        if direction == "in":
            stats, counts = _direction_stats(n, src, dst, values, config.statistics)
        else:
            stats, counts = _direction_stats(n, dst, src, values, config.statistics)
        blocks.append(stats)
        count_cols.append(counts)
        for c in config.source_columns:
            names.extend(f"{direction}_f{c}_{s}" for s in config.statistics)
    for direction, counts in zip(config.directions, count_cols):
        blocks.append(counts[:, None])
        names.append(f"{direction}_degree")

    matrix = np.hstack(blocks)
    return FeatureMatrix(
        values=matrix,
        provenance=tuple("aggregated" for _ in names),
        column_names=tuple(names),
    )


def assemble(
    nodes: NodeTable,
    mode: str,
    embeddings: np.ndarray | None = None,
) -> FeatureMatrix:
    """Select the LF or AF column set, optionally concatenating embeddings."""
    mode = mode.upper()
    if mode not in ("LF", "AF"):
        raise ValueError(f"mode must be 'LF' or 'AF', got {mode!r}")
    if mode == "LF":
        values = nodes.features[:, : nodes.local_count]
        provenance = ["local"] * nodes.local_count
    else:
        values = nodes.features
        provenance = ["local"] * nodes.local_count + ["aggregated"] * (
            nodes.total_count - nodes.local_count
        )
    names = [f"f{i}" for i in range(values.shape[1])]
    if embeddings is not None:
        embeddings = np.asarray(embeddings, dtype=np.float64)
        if embeddings.shape[0] != values.shape[0]:
            raise ValueError(
                f"embeddings have {embeddings.shape[0]} rows, features have {values.shape[0]}"
            )
        provenance = provenance + ["embedding"] * embeddings.shape[1]
        names = names + [f"e{i}" for i in range(embeddings.shape[1])]
        values = np.hstack([values, embeddings])
    else:
        values = values.copy()
    return FeatureMatrix(
        values=values, provenance=tuple(provenance), column_names=tuple(names)
    )


def export_feature_csv(matrix: FeatureMatrix, path) -> None:
    """Columnar CSV with a provenance header row above the column names."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(matrix.provenance) + "\n")
        fh.write(",".join(matrix.column_names) + "\n")
        for row in matrix.values:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
