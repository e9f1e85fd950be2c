"""Pydantic response models for the analyst API."""

from __future__ import annotations

from pydantic import BaseModel


class TimestepsResponse(BaseModel):
    count: int
    min: int
    max: int
    per_step_node_counts: list[int]


class SliceNode(BaseModel):
    tx_id: int
    x: float
    y: float
    label: str
    predicted: str | None
    in_degree: int
    out_degree: int


class SliceEdge(BaseModel):
    source: int
    target: int


class ClassCounts(BaseModel):
    illicit: int
    licit: int
    unknown: int


class StatsResponse(BaseModel):
    time_step: int
    node_count: int
    edge_count: int
    class_counts: ClassCounts
    # transfer[src_class][dst_class] = directed edge count; totals = edge_count
    transfer: dict[str, dict[str, int]]


class SliceResponse(BaseModel):
    time_step: int
    layout: str
    nodes: list[SliceNode]
    edges: list[SliceEdge]
    stats: StatsResponse


class NeighborRef(BaseModel):
    tx_id: int
    direction: str  # "in" | "out"
    label: str


class TxResponse(BaseModel):
    tx_id: int
    time_step: int
    label: str
    predicted: str | None
    features_preview: list[float]
    neighbors: list[NeighborRef]


class SearchResponse(BaseModel):
    query: str
    total_matched: int
    tx_ids: list[int]


class ErrorPayload(BaseModel):
    error: str
    detail: str
