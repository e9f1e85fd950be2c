// Node color assignment. Selection beats highlight beats class color.

import type { ColorMode, LabelName, SliceNode } from "./types.js";

export const CLASS_COLORS: Record<LabelName, string> = {
  illicit: "#e03131",
  licit: "#1971c2",
  // Pure absence of color is invisible on canvas; unknowns go faint gray.
  unknown: "rgba(160,160,160,0.35)",
};

export const SELECTED_COLOR = "#f59f00";
export const HIGHLIGHT_COLOR = "#2f9e44";

export function labelOf(node: SliceNode, mode: ColorMode): LabelName {
  if (mode === "predicted") return node.predicted ?? "unknown";
  return node.label;
}

export function nodeColor(
  node: SliceNode,
  mode: ColorMode,
  selected: Set<number>,
  highlight: Set<number>,
): string {
  if (selected.has(node.tx_id)) return SELECTED_COLOR;
  if (highlight.has(node.tx_id)) return HIGHLIGHT_COLOR;
  return CLASS_COLORS[labelOf(node, mode)];
}
