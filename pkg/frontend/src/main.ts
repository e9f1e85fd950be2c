// DOM wiring: slider, toggles, search, stats panel, canvas interactions.
// All displayed values come from the service; this file only routes them.

import { ApiClient } from "./api.js";
import { CLASS_COLORS, HIGHLIGHT_COLOR, SELECTED_COLOR } from "./colors.js";
import { fitTransform, hitTest, renderScene } from "./render.js";
import {
  ViewState,
  clearSelection,
  decodeHash,
  encodeHash,
  neighborUnion,
  selectMany,
  setColors,
  setLayout,
  setQuery,
  setStep,
  toggleSelect,
} from "./state.js";
import type { LayoutMode, SliceResponse, TxResponse } from "./types.js";

const api = new ApiClient();

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const slider = document.getElementById("step-slider") as HTMLInputElement;
const stepLabel = document.getElementById("step-label")!;
const layoutButtons = document.querySelectorAll<HTMLButtonElement>("[data-layout]");
const colorButtons = document.querySelectorAll<HTMLButtonElement>("[data-colors]");
const searchBox = document.getElementById("search-box") as HTMLInputElement;
const searchNote = document.getElementById("search-note")!;
const statsPanel = document.getElementById("stats-panel")!;
const transferTable = document.getElementById("transfer-table")!;
const detailPanel = document.getElementById("detail-panel")!;
const banner = document.getElementById("error-banner")!;

let state: ViewState = decodeHash(location.hash);
let maxStep = 1;
let availableLayouts: LayoutMode[] = ["raw"];
let currentSlice: SliceResponse | null = null;

function showError(message: string): void {
  banner.textContent = message;
  banner.classList.add("visible");
  window.setTimeout(() => banner.classList.remove("visible"), 5000);
}

function syncControls(): void {
  slider.value = String(state.step);
  stepLabel.textContent = `step ${state.step} / ${maxStep}`;
  layoutButtons.forEach((b) =>
    b.classList.toggle("active", b.dataset.layout === state.layout),
  );
  colorButtons.forEach((b) =>
    b.classList.toggle("active", b.dataset.colors === state.colors),
  );
  history.replaceState(null, "", encodeHash(state));
}

function repaint(): void {
  if (!currentSlice) return;
  const highlight = neighborUnion(state.selected, currentSlice.edges);
  const fit = fitTransform(currentSlice, canvas.width, canvas.height);
  renderScene(ctx, currentSlice, state, highlight, canvas.width, canvas.height, fit);
}

function renderStats(slice: SliceResponse): void {
  const c = slice.stats.class_counts;
  statsPanel.innerHTML = `
    <div>nodes <b>${slice.stats.node_count}</b> &middot; edges <b>${slice.stats.edge_count}</b></div>
    <div><span class="dot" style="background:${CLASS_COLORS.illicit}"></span> illicit <b>${c.illicit}</b></div>
    <div><span class="dot" style="background:${CLASS_COLORS.licit}"></span> licit <b>${c.licit}</b></div>
    <div><span class="dot" style="background:#adb5bd"></span> unknown <b>${c.unknown}</b></div>`;
  const order = ["illicit", "licit", "unknown"];
  let html = "<tr><th>from \\ to</th>" + order.map((o) => `<th>${o}</th>`).join("") + "</tr>";
  for (const src of order) {
    html += `<tr><th>${src}</th>`;
    for (const dst of order) html += `<td>${slice.stats.transfer[src]?.[dst] ?? 0}</td>`;
    html += "</tr>";
  }
  transferTable.innerHTML = html;
}

async function renderDetail(): Promise<void> {
  if (state.selected.size !== 1) {
    detailPanel.innerHTML =
      state.selected.size > 1
        ? `<b>${state.selected.size}</b> transactions selected`
        : "click a node or search to select";
    return;
  }
  const txId = [...state.selected][0];
  try {
    const tx: TxResponse = await api.tx(txId);
    const inbound = tx.neighbors.filter((n) => n.direction === "in").length;
    const outbound = tx.neighbors.length - inbound;
    detailPanel.innerHTML = `
      <div>tx <b>${tx.tx_id}</b> &middot; step ${tx.time_step}</div>
      <div>label <b>${tx.label}</b>${tx.predicted ? ` &middot; predicted <b>${tx.predicted}</b>` : ""}</div>
      <div><span class="swatch" style="background:${HIGHLIGHT_COLOR}"></span>
           neighbors: ${inbound} in, ${outbound} out</div>`;
  } catch (err) {
    detailPanel.textContent = `detail unavailable: ${err}`;
  }
}

async function loadStep(): Promise<void> {
  try {
    const slice = await api.sliceLatest(state.step, state.layout);
    if (slice === null) return; // superseded by a newer slider position
    currentSlice = slice;
    renderStats(slice);
    repaint();
    void api.prefetchStep(state.step, availableLayouts);
  } catch (err) {
    showError(`failed to load step ${state.step}: ${err}`); // keep last scene
  }
}

function switchLayout(layout: LayoutMode): void {
  if (!availableLayouts.includes(layout)) {
    showError(`layout '${layout}' unavailable: no trained graph model loaded`);
    return;
  }
  state = setLayout(state, layout);
  syncControls();
  if (api.hasCachedSlice(state.step, layout)) {
    // Cache hit: swap coordinates without any request.
    void api.slice(state.step, layout).then((slice) => {
      currentSlice = slice;
      repaint();
    });
  } else {
    void loadStep();
  }
}

slider.addEventListener("input", () => {
  state = setStep(state, Number(slider.value), maxStep);
  syncControls();
  void loadStep();
  void renderDetail();
});

layoutButtons.forEach((b) =>
  b.addEventListener("click", () => switchLayout(b.dataset.layout as LayoutMode)),
);

colorButtons.forEach((b) =>
  b.addEventListener("click", () => {
    state = setColors(state, b.dataset.colors as "true" | "predicted");
    syncControls();
    repaint(); // client-side recolor only
  }),
);

let searchTimer = 0;
searchBox.addEventListener("input", () => {
  window.clearTimeout(searchTimer);
  searchTimer = window.setTimeout(async () => {
    state = setQuery(state, searchBox.value.trim());
    if (!state.query) {
      state = clearSelection(state);
      searchNote.textContent = "";
      syncControls();
      repaint();
      void renderDetail();
      return;
    }
    try {
      const found = await api.search(state.query);
      const visible = new Set(currentSlice?.nodes.map((n) => n.tx_id) ?? []);
      const inSlice = found.tx_ids.filter((id) => visible.has(id));
      state = selectMany(state, inSlice);
      searchNote.textContent = found.total_matched
        ? `${found.total_matched} match(es), ${inSlice.length} in this step`
        : "no matches";
      syncControls();
      repaint();
      void renderDetail();
    } catch (err) {
      showError(`search failed: ${err}`);
    }
  }, 150);
});

canvas.addEventListener("click", (ev) => {
  if (!currentSlice) return;
  const rect = canvas.getBoundingClientRect();
  const fit = fitTransform(currentSlice, canvas.width, canvas.height);
  const hit = hitTest(
    currentSlice, state, fit,
    ev.clientX - rect.left, ev.clientY - rect.top,
  );
  if (hit === null) {
    state = clearSelection(state);
    searchBox.value = "";
    searchNote.textContent = "";
  } else {
    state = toggleSelect(state, hit, ev.shiftKey);
  }
  syncControls();
  repaint();
  void renderDetail();
});

canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  const factor = ev.deltaY < 0 ? 1.15 : 1 / 1.15;
  const rect = canvas.getBoundingClientRect();
  const cx = ev.clientX - rect.left;
  const cy = ev.clientY - rect.top;
  const t = state.transform;
  state = {
    ...state,
    transform: {
      scale: t.scale * factor,
      tx: cx - (cx - t.tx) * factor,
      ty: cy - (cy - t.ty) * factor,
    },
  };
  repaint();
});

let dragging = false;
let lastX = 0;
let lastY = 0;
canvas.addEventListener("mousedown", (ev) => {
  dragging = true;
  lastX = ev.clientX;
  lastY = ev.clientY;
});
window.addEventListener("mouseup", () => (dragging = false));
window.addEventListener("mousemove", (ev) => {
  if (!dragging) return;
  const t = state.transform;
  state = {
    ...state,
    transform: { ...t, tx: t.tx + ev.clientX - lastX, ty: t.ty + ev.clientY - lastY },
  };
  lastX = ev.clientX;
  lastY = ev.clientY;
  repaint();
});

function resizeCanvas(): void {
  const holder = canvas.parentElement!;
  canvas.width = holder.clientWidth;
  canvas.height = holder.clientHeight;
  repaint();
}
window.addEventListener("resize", resizeCanvas);

async function boot(): Promise<void> {
  resizeCanvas();
  try {
    const [steps, layouts] = await Promise.all([api.timesteps(), api.layouts()]);
    maxStep = steps.max;
    availableLayouts = layouts.modes;
    slider.min = String(steps.min);
    slider.max = String(steps.max);
    if (!availableLayouts.includes(state.layout)) state = setLayout(state, "raw");
    state = setStep(state, state.step, maxStep);
    // Restore selection from the deep link after clamping cleared it.
    const linked = decodeHash(location.hash);
    if (linked.step === state.step && linked.selected.size) {
      state = selectMany(state, [...linked.selected]);
    }
    const legend = document.getElementById("legend")!;
    legend.innerHTML = `
      <span><span class="dot" style="background:${CLASS_COLORS.illicit}"></span>illicit</span>
      <span><span class="dot" style="background:${CLASS_COLORS.licit}"></span>licit</span>
      <span><span class="dot" style="background:#adb5bd"></span>unknown</span>
      <span><span class="dot" style="background:${SELECTED_COLOR}"></span>selected</span>
      <span><span class="dot" style="background:${HIGHLIGHT_COLOR}"></span>neighbors</span>`;
    syncControls();
    await loadStep();
    void renderDetail();
  } catch (err) {
    showError(`service unreachable: ${err}`);
  }
}

void boot();
