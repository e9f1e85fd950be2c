import { describe, expect, it } from "vitest";

import { CLASS_COLORS, HIGHLIGHT_COLOR, SELECTED_COLOR, nodeColor } from "../src/colors.js";
import { POINTS_ONLY_THRESHOLD, lodFor } from "../src/lod.js";
import { Canvas2D, fitTransform, hitTest, renderScene } from "../src/render.js";
import { initialState, neighborUnion, selectMany } from "../src/state.js";
import type { SliceNode, SliceResponse } from "../src/types.js";

function node(tx: number, x: number, y: number, label: SliceNode["label"]): SliceNode {
  return { tx_id: tx, x, y, label, predicted: "licit", in_degree: 0, out_degree: 0 };
}

function slice(nodes: SliceNode[], edges: SliceResponse["edges"] = []): SliceResponse {
  return {
    time_step: 1,
    layout: "raw",
    nodes,
    edges,
    stats: {
      time_step: 1,
      node_count: nodes.length,
      edge_count: edges.length,
      class_counts: { illicit: 0, licit: 0, unknown: 0 },
      transfer: {},
    },
  };
}

class FakeContext implements Canvas2D {
  fillStyle: string | CanvasGradient | CanvasPattern = "";
  strokeStyle: string | CanvasGradient | CanvasPattern = "";
  lineWidth = 1;
  globalAlpha = 1;
  ops: string[] = [];
  fillsByColor = new Map<string, number>();
  shapesInPath = 0;

  clearRect(): void {
    this.ops.push("clear");
  }
  beginPath(): void {
    this.shapesInPath = 0;
    this.ops.push("beginPath");
  }
  moveTo(): void {}
  lineTo(): void {
    this.shapesInPath += 1;
  }
  arc(): void {
    this.shapesInPath += 1;
  }
  rect(): void {
    this.shapesInPath += 1;
  }
  fill(): void {
    const color = String(this.fillStyle);
    this.fillsByColor.set(
      color,
      (this.fillsByColor.get(color) ?? 0) + this.shapesInPath,
    );
    this.ops.push(`fill:${color}:${this.shapesInPath}`);
  }
  stroke(): void {
    this.ops.push(`stroke:${this.shapesInPath}`);
  }
}

describe("color assignment", () => {
  it("maps classes to the documented palette", () => {
    const n = node(1, 0, 0, "illicit");
    expect(nodeColor(n, "true", new Set(), new Set())).toBe(CLASS_COLORS.illicit);
    expect(nodeColor({ ...n, label: "licit" }, "true", new Set(), new Set())).toBe(
      CLASS_COLORS.licit,
    );
  });

  it("selection beats highlight beats class", () => {
    const n = node(1, 0, 0, "illicit");
    expect(nodeColor(n, "true", new Set([1]), new Set([1]))).toBe(SELECTED_COLOR);
    expect(nodeColor(n, "true", new Set(), new Set([1]))).toBe(HIGHLIGHT_COLOR);
  });

  it("predicted mode recolors without touching coordinates", () => {
    const n = { ...node(1, 0, 0, "illicit"), predicted: "licit" as const };
    expect(nodeColor(n, "predicted", new Set(), new Set())).toBe(CLASS_COLORS.licit);
    const missing = { ...n, predicted: null };
    expect(nodeColor(missing, "predicted", new Set(), new Set())).toBe(
      CLASS_COLORS.unknown,
    );
  });
});

describe("level of detail", () => {
  it("keeps circles below the threshold and degrades to points above", () => {
    expect(lodFor(POINTS_ONLY_THRESHOLD, 100).pointsOnly).toBe(false);
    expect(lodFor(POINTS_ONLY_THRESHOLD + 1, 100).pointsOnly).toBe(true);
  });

  it("fades edges on dense slices", () => {
    expect(lodFor(8000, 9000).edgeAlpha).toBeLessThan(lodFor(100, 50).edgeAlpha);
  });
});

describe("scene rendering", () => {
  it("draws exactly one red marker for a single illicit node", () => {
    const s = slice([node(1, 0, 0, "illicit"), node(2, 1, 1, "licit"),
                     node(3, 2, 0, "unknown")]);
    const ctx = new FakeContext();
    const fit = fitTransform(s, 400, 300);
    renderScene(ctx, s, initialState(), new Set(), 400, 300, fit);
    expect(ctx.fillsByColor.get(CLASS_COLORS.illicit)).toBe(1);
    expect(ctx.fillsByColor.get(CLASS_COLORS.licit)).toBe(1);
  });

  it("selecting a hub paints it orange and its neighbor union green", () => {
    const nodes = [
      node(1, 0, 0, "licit"), node(10, 1, 0, "licit"),
      node(11, 0, 1, "licit"), node(12, 1, 1, "licit"),
      node(99, 2, 2, "licit"),
    ];
    const edges = [
      { source: 10, target: 1 },
      { source: 11, target: 1 },
      { source: 1, target: 12 },
      { source: 99, target: 10 },
    ];
    const s = slice(nodes, edges);
    const view = selectMany(initialState(), [1]);
    const highlight = neighborUnion(view.selected, s.edges);
    const ctx = new FakeContext();
    renderScene(ctx, s, view, highlight, 400, 300, fitTransform(s, 400, 300));
    expect(ctx.fillsByColor.get(SELECTED_COLOR)).toBe(1);
    expect(ctx.fillsByColor.get(HIGHLIGHT_COLOR)).toBe(3); // 2 in + 1 out
  });

  it("batches nodes into one fill per distinct color", () => {
    const nodes = Array.from({ length: 500 }, (_, i) =>
      node(i, i % 25, Math.floor(i / 25), i % 2 ? "illicit" : "licit"),
    );
    const s = slice(nodes);
    const ctx = new FakeContext();
    const stats = renderScene(
      ctx, s, initialState(), new Set(), 800, 600, fitTransform(s, 800, 600),
    );
    expect(stats.colorBatches).toBe(2);
    expect(ctx.fillsByColor.get(CLASS_COLORS.illicit)).toBe(250);
  });

  it("keeps interaction cheap on an 8k-node slice", () => {
    const nodes = Array.from({ length: 8000 }, (_, i) =>
      node(i, Math.cos(i), Math.sin(i), "unknown"),
    );
    const s = slice(nodes);
    const fit = fitTransform(s, 1600, 900);
    renderScene(new FakeContext(), s, initialState(), new Set(), 1600, 900, fit);
    let best = Infinity;
    let ctx = new FakeContext();
    for (let run = 0; run < 3; run += 1) {
      ctx = new FakeContext();
      const started = performance.now();
      renderScene(ctx, s, initialState(), new Set(), 1600, 900, fit);
      best = Math.min(best, performance.now() - started);
    }
    // Scene assembly must fit comfortably inside a 33ms (30 fps) frame.
    expect(best).toBeLessThan(33);
    const fills = ctx.ops.filter((o) => o.startsWith("fill")).length;
    expect(fills).toBeLessThanOrEqual(3); // batched, not per node
  });
});

describe("hit testing", () => {
  it("picks the nearest node within the radius", () => {
    const s = slice([node(1, 0, 0, "licit"), node(2, 10, 10, "licit")]);
    const fit = fitTransform(s, 400, 400);
    const view = initialState();
    const [x, y] = [0 * fit.scale + fit.tx, 0 * fit.scale + fit.ty];
    expect(hitTest(s, view, fit, x + 2, y - 2)).toBe(1);
    expect(hitTest(s, view, fit, x + 200, y + 200)).toBeNull();
  });
});
