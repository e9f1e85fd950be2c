import { describe, expect, it } from "vitest";

import {
  clearSelection,
  decodeHash,
  encodeHash,
  initialState,
  neighborUnion,
  selectMany,
  setColors,
  setLayout,
  setStep,
  toggleSelect,
} from "../src/state.js";
import type { SliceEdge } from "../src/types.js";

describe("step navigation", () => {
  it("clamps to the valid range", () => {
    const s = initialState();
    expect(setStep(s, 99, 49).step).toBe(49);
    expect(setStep(s, -3, 49).step).toBe(1);
    expect(setStep(s, 7.4, 49).step).toBe(7);
  });

  it("clears the per-slice selection when the step changes", () => {
    let s = selectMany(initialState(), [5, 6]);
    s = setStep(s, 2, 10);
    expect(s.selected.size).toBe(0);
  });
});

describe("selection", () => {
  it("single click replaces the selection", () => {
    let s = selectMany(initialState(), [1, 2]);
    s = toggleSelect(s, 9, false);
    expect([...s.selected]).toEqual([9]);
  });

  it("shift click accumulates and re-click removes", () => {
    let s = toggleSelect(initialState(), 1, false);
    s = toggleSelect(s, 2, true);
    expect([...s.selected].sort()).toEqual([1, 2]);
    s = toggleSelect(s, 2, true);
    expect([...s.selected]).toEqual([1]);
  });

  it("clicking the sole selected node deselects it", () => {
    let s = toggleSelect(initialState(), 4, false);
    s = toggleSelect(s, 4, false);
    expect(s.selected.size).toBe(0);
  });

  it("clearSelection also resets the query", () => {
    let s = selectMany(initialState(), [1]);
    s = { ...s, query: "42" };
    s = clearSelection(s);
    expect(s.selected.size).toBe(0);
    expect(s.query).toBe("");
  });
});

describe("neighbor union", () => {
  const edges: SliceEdge[] = [
    { source: 1, target: 2 },
    { source: 3, target: 1 },
    { source: 2, target: 3 },
    { source: 4, target: 5 },
  ];

  it("collects in- and out-flowing neighbors of the selection", () => {
    const got = neighborUnion(new Set([1]), edges);
    expect([...got].sort()).toEqual([2, 3]);
  });

  it("a node with two in-neighbors and one out-neighbor highlights all three", () => {
    const star: SliceEdge[] = [
      { source: 10, target: 1 },
      { source: 11, target: 1 },
      { source: 1, target: 12 },
    ];
    const got = neighborUnion(new Set([1]), star);
    expect([...got].sort()).toEqual([10, 11, 12]);
  });

  it("never includes selected nodes themselves", () => {
    const got = neighborUnion(new Set([1, 2]), edges);
    expect(got.has(1)).toBe(false);
    expect(got.has(2)).toBe(false);
    expect(got.has(3)).toBe(true);
  });
});

describe("search-driven selection", () => {
  it("selects exactly the server-matched ids that are visible", () => {
    const serverMatches = [101, 205, 309];
    const visible = new Set([101, 309, 500]);
    const inSlice = serverMatches.filter((id) => visible.has(id));
    const s = selectMany(initialState(), inSlice);
    expect([...s.selected].sort((a, b) => a - b)).toEqual([101, 309]);
  });
});

describe("deep-link hash codec", () => {
  it("round-trips the full view state", () => {
    let s = initialState();
    s = setStep(s, 17, 49);
    s = setLayout(s, "gcn");
    s = setColors(s, "predicted");
    s = selectMany(s, [42, 7]);
    s = { ...s, query: "12 3" };
    const decoded = decodeHash(encodeHash(s));
    expect(decoded.step).toBe(17);
    expect(decoded.layout).toBe("gcn");
    expect(decoded.colors).toBe("predicted");
    expect([...decoded.selected].sort((a, b) => a - b)).toEqual([7, 42]);
    expect(decoded.query).toBe("12 3");
  });

  it("ignores malformed fragments", () => {
    const decoded = decodeHash("#t=zap&layout=umap&sel=a,b&bogus");
    expect(decoded.step).toBe(1);
    expect(decoded.layout).toBe("raw");
    expect(decoded.selected.size).toBe(0);
  });

  it("empty hash gives the initial state", () => {
    expect(decodeHash("")).toEqual(initialState());
  });
});
