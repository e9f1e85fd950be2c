// Response shapes of the /api endpoints (field names match the wire format).

export type LabelName = "illicit" | "licit" | "unknown";
export type LayoutMode = "raw" | "gcn";
export type ColorMode = "true" | "predicted";

export interface TimestepsResponse {
  count: number;
  min: number;
  max: number;
  per_step_node_counts: number[];
}

export interface SliceNode {
  tx_id: number;
  x: number;
  y: number;
  label: LabelName;
  predicted: LabelName | null;
  in_degree: number;
  out_degree: number;
}

export interface SliceEdge {
  source: number;
  target: number;
}

export interface ClassCounts {
  illicit: number;
  licit: number;
  unknown: number;
}

export interface StatsResponse {
  time_step: number;
  node_count: number;
  edge_count: number;
  class_counts: ClassCounts;
  transfer: Record<string, Record<string, number>>;
}

export interface SliceResponse {
  time_step: number;
  layout: LayoutMode;
  nodes: SliceNode[];
  edges: SliceEdge[];
  stats: StatsResponse;
}

export interface NeighborRef {
  tx_id: number;
  direction: "in" | "out";
  label: LabelName;
}

export interface TxResponse {
  tx_id: number;
  time_step: number;
  label: LabelName;
  predicted: LabelName | null;
  features_preview: number[];
  neighbors: NeighborRef[];
}

export interface SearchResponse {
  query: string;
  total_matched: number;
  tx_ids: number[];
}

export interface LayoutsResponse {
  modes: LayoutMode[];
  model_ref: string | null;
}
