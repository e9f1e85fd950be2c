// View state and its reducers. Everything displayed derives from server
// payloads; this module only tracks what the analyst is looking at.

import type { ColorMode, LayoutMode, SliceEdge } from "./types.js";

export interface Transform {
  scale: number;
  tx: number;
  ty: number;
}

export interface ViewState {
  step: number;
  layout: LayoutMode;
  colors: ColorMode;
  selected: Set<number>;
  query: string;
  transform: Transform;
}

export const IDENTITY: Transform = { scale: 1, tx: 0, ty: 0 };

export function initialState(step = 1): ViewState {
  return {
    step,
    layout: "raw",
    colors: "true",
    selected: new Set(),
    query: "",
    transform: { ...IDENTITY },
  };
}

export function setStep(state: ViewState, step: number, max: number): ViewState {
  const clamped = Math.min(Math.max(1, Math.round(step)), Math.max(1, max));
  // Selection is per-slice; switching steps clears it, the viewport stays.
  return { ...state, step: clamped, selected: new Set() };
}

export function setLayout(state: ViewState, layout: LayoutMode): ViewState {
  return { ...state, layout };
}

export function setColors(state: ViewState, colors: ColorMode): ViewState {
  return { ...state, colors };
}

export function toggleSelect(state: ViewState, txId: number, additive: boolean): ViewState {
  const selected = new Set(additive ? state.selected : []);
  if (state.selected.has(txId) && (additive || state.selected.size === 1)) {
    selected.delete(txId);
  } else {
    selected.add(txId);
  }
  return { ...state, selected };
}

export function selectMany(state: ViewState, txIds: number[]): ViewState {
  return { ...state, selected: new Set(txIds) };
}

export function clearSelection(state: ViewState): ViewState {
  return { ...state, selected: new Set(), query: "" };
}

export function setQuery(state: ViewState, query: string): ViewState {
  return { ...state, query };
}

/** In-or-out-flowing neighbor union of the selected set, from slice edges. */
export function neighborUnion(selected: Set<number>, edges: SliceEdge[]): Set<number> {
  const highlight = new Set<number>();
  for (const e of edges) {
    if (selected.has(e.source) && !selected.has(e.target)) highlight.add(e.target);
    if (selected.has(e.target) && !selected.has(e.source)) highlight.add(e.source);
  }
  return highlight;
}

// --- deep-linkable URL state ------------------------------------------------

export function encodeHash(state: ViewState): string {
  const parts = [`t=${state.step}`, `layout=${state.layout}`, `colors=${state.colors}`];
  if (state.selected.size) {
    parts.push(`sel=${[...state.selected].sort((a, b) => a - b).join(",")}`);
  }
  if (state.query) parts.push(`q=${encodeURIComponent(state.query)}`);
  return "#" + parts.join("&");
}

export function decodeHash(hash: string): ViewState {
  const state = initialState();
  const body = hash.startsWith("#") ? hash.slice(1) : hash;
  if (!body) return state;
  for (const part of body.split("&")) {
    const [key, raw = ""] = part.split("=");
    switch (key) {
      case "t": {
        const t = parseInt(raw, 10);
        if (Number.isFinite(t) && t >= 1) state.step = t;
        break;
      }
      case "layout":
        if (raw === "raw" || raw === "gcn") state.layout = raw;
        break;
      case "colors":
        if (raw === "true" || raw === "predicted") state.colors = raw;
        break;
      case "sel":
        state.selected = new Set(
          raw.split(",").map((s) => parseInt(s, 10)).filter((v) => Number.isFinite(v)),
        );
        break;
      case "q":
        state.query = decodeURIComponent(raw);
        break;
    }
  }
  return state;
}
