/** Browser bootstrap: wires the API client, state, renderer, and the
 * comparison panel into the page. Clicking the map places a what-if
 * source; the panel shows the last two placements side by side.
 */

import { ApiClient } from "./api.js";
import { loadWorkspace, placeWhatIf } from "./controller.js";
import { applyScene, fitTransform, legend, renderScene } from "./render.js";
import { UiState, type WhatIfEntry } from "./state.js";

const WIDTH = 900;
const HEIGHT = 500;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

function toast(message: string): void {
  const box = el<HTMLDivElement>("toast");
  box.textContent = message;
  box.classList.add("visible");
  window.setTimeout(() => box.classList.remove("visible"), 4000);
}

function panelEntry(entry: WhatIfEntry, slot: number): string {
  const count = entry.downstreamWaterbodies.length;
  const ids = entry.downstreamWaterbodies.join(", ") || "none";
  return [
    `<div class="entry slot-${slot}">`,
    `<h3>${entry.label} @ (${entry.point.x.toFixed(0)}, ${entry.point.y.toFixed(0)})</h3>`,
    `<p>watershed ${entry.sourceHuc12}</p>`,
    `<p>attached to node ${entry.attachedNode}</p>`,
    `<p><strong>${count}</strong> downstream waterbodies: ${ids}</p>`,
    `</div>`,
  ].join("");
}

function renderPanel(state: UiState): void {
  const panel = el<HTMLDivElement>("comparison");
  panel.innerHTML =
    state.comparison.length === 0
      ? "<p class='hint'>click the map to place a hypothetical pollutant source</p>"
      : state.comparison.map((entry, i) => panelEntry(entry, i)).join("");
}

function renderLegend(): void {
  const box = el<HTMLDivElement>("legend");
  box.innerHTML = legend()
    .map(
      (item) =>
        `<span class="legend-item"><span class="chip ${item.shape}" style="background:${item.color}"></span>${item.label}</span>`,
    )
    .join("");
}

async function start(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("service") ?? "http://127.0.0.1:8000";
  const api = new ApiClient(base);
  const state = new UiState();
  const svg = el<HTMLElement>("map") as unknown as SVGElement;

  const redraw = () => {
    applyScene(renderScene(state, WIDTH, HEIGHT), svg);
    renderPanel(state);
  };

  renderLegend();
  try {
    await loadWorkspace(api, state);
  } catch {
    state.serviceDown = true;
  }
  redraw();

  el<HTMLButtonElement>("retry").addEventListener("click", async () => {
    try {
      await loadWorkspace(api, state);
    } catch {
      state.serviceDown = true;
    }
    redraw();
  });

  svg.addEventListener("click", async (event: Event) => {
    if (!state.viewport) return;
    const mouse = event as MouseEvent;
    const rect = (svg as unknown as HTMLElement).getBoundingClientRect();
    const t = fitTransform(state.viewport, WIDTH, HEIGHT);
    const x = state.viewport[0] + (mouse.clientX - rect.left) / t.scale;
    const y = state.viewport[3] - (mouse.clientY - rect.top) / t.scale;
    const outcome = await placeWhatIf(api, state, { x, y });
    if (!outcome.ok) {
      toast(
        outcome.reason === "outside-watersheds"
          ? "outside all watersheds"
          : "service unreachable",
      );
    }
    redraw();
  });
}

start().catch((err) => console.error(err));
