// Canvas scene rendering. Nodes are batched per color into single paths so a
// dense slice costs a handful of fill calls, not one per node. The functions
// draw against a minimal 2D-context interface, which keeps them testable
// without a browser.

import { nodeColor } from "./colors.js";
import { lodFor } from "./lod.js";
import type { Transform, ViewState } from "./state.js";
import type { SliceResponse } from "./types.js";

export interface Canvas2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  fill(): void;
  stroke(): void;
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
}

export interface SceneStats {
  nodesDrawn: number;
  edgesDrawn: number;
  colorBatches: number;
}

/** Transform that fits the slice extent into width x height with padding. */
export function fitTransform(
  slice: SliceResponse,
  width: number,
  height: number,
  pad = 24,
): Transform {
  if (!slice.nodes.length) return { scale: 1, tx: width / 2, ty: height / 2 };
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const n of slice.nodes) {
    if (n.x < minX) minX = n.x;
    if (n.x > maxX) maxX = n.x;
    if (n.y < minY) minY = n.y;
    if (n.y > maxY) maxY = n.y;
  }
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  const scale = Math.min((width - 2 * pad) / spanX, (height - 2 * pad) / spanY);
  return {
    scale,
    tx: pad - minX * scale + (width - 2 * pad - spanX * scale) / 2,
    ty: pad - minY * scale + (height - 2 * pad - spanY * scale) / 2,
  };
}

export function toScreen(t: Transform, x: number, y: number): [number, number] {
  return [x * t.scale + t.tx, y * t.scale + t.ty];
}

export function renderScene(
  ctx: Canvas2D,
  slice: SliceResponse,
  view: ViewState,
  highlight: Set<number>,
  width: number,
  height: number,
  fit: Transform,
): SceneStats {
  ctx.clearRect(0, 0, width, height);
  const t: Transform = {
    scale: fit.scale * view.transform.scale,
    tx: fit.tx * view.transform.scale + view.transform.tx,
    ty: fit.ty * view.transform.scale + view.transform.ty,
  };
  const lod = lodFor(slice.nodes.length, slice.edges.length);
  const position = new Map<number, [number, number]>();
  for (const n of slice.nodes) position.set(n.tx_id, toScreen(t, n.x, n.y));

  let edgesDrawn = 0;
  if (lod.drawEdges && slice.edges.length) {
    ctx.globalAlpha = lod.edgeAlpha;
    ctx.strokeStyle = "#495057";
    ctx.lineWidth = 1;
    ctx.beginPath();
    for (const e of slice.edges) {
      const a = position.get(e.source);
      const b = position.get(e.target);
      if (!a || !b) continue;
      ctx.moveTo(a[0], a[1]);
      ctx.lineTo(b[0], b[1]);
      edgesDrawn += 1;
    }
    ctx.stroke();
    ctx.globalAlpha = 1;
  }

  // One path per distinct color.
  const batches = new Map<string, [number, number][]>();
  for (const n of slice.nodes) {
    const color = nodeColor(n, view.colors, view.selected, highlight);
    let bucket = batches.get(color);
    if (!bucket) {
      bucket = [];
      batches.set(color, bucket);
    }
    bucket.push(position.get(n.tx_id)!);
  }
  const r = lod.nodeRadius;
  for (const [color, points] of batches) {
    ctx.fillStyle = color;
    ctx.beginPath();
    for (const [x, y] of points) {
      if (lod.pointsOnly) {
        ctx.rect(x - r, y - r, 2 * r, 2 * r);
      } else {
        ctx.moveTo(x + r, y);
        ctx.arc(x, y, r, 0, 2 * Math.PI);
      }
    }
    ctx.fill();
  }
  return {
    nodesDrawn: slice.nodes.length,
    edgesDrawn,
    colorBatches: batches.size,
  };
}

/** Nearest node within `radius` screen pixels, for click selection. */
export function hitTest(
  slice: SliceResponse,
  view: ViewState,
  fit: Transform,
  sx: number,
  sy: number,
  radius = 8,
): number | null {
  const t: Transform = {
    scale: fit.scale * view.transform.scale,
    tx: fit.tx * view.transform.scale + view.transform.tx,
    ty: fit.ty * view.transform.scale + view.transform.ty,
  };
  let best: number | null = null;
  let bestDist = radius * radius;
  for (const n of slice.nodes) {
    const [x, y] = toScreen(t, n.x, n.y);
    const d = (x - sx) * (x - sx) + (y - sy) * (y - sy);
    if (d <= bestDist) {
      bestDist = d;
      best = n.tx_id;
    }
  }
  return best;
}
