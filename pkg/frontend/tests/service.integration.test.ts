/** Integration acceptance against the real service on the two-basin
 * demo workspace (spawned by globalSetup): divergent what-if placements
 * must highlight disjoint downstream sets that equal the CLI's
 * `downstream` output for the attached nodes, and repeated placement at
 * one point must render identical panel entries.
 */

import { spawnSync } from "node:child_process";
import { describe, expect, inject, it } from "vitest";

import { ApiClient, OutsideWatershedsError } from "../src/api.js";
import { loadWorkspace, placeWhatIf, selectNodeDownstream } from "../src/controller.js";
import { highlightIndex, renderScene } from "../src/render.js";
import { UiState } from "../src/state.js";
import type { DirectionResponse } from "../src/types.js";

const LEFT_CLICK = { x: 950, y: 900 };
const RIGHT_CLICK = { x: 1050, y: 900 };

function client(): ApiClient {
  return new ApiClient(inject("serviceUrl"));
}

function cliDownstreamWaterbodies(node: number): number[] {
  const workspace = inject("workspaceDir");
  const result = spawnSync(
    inject("pythonBin"),
    [
      "-m", "hydrograph.cli", "downstream",
      "--graph", `${workspace}/edges.csv`,
      "--kinds", `${workspace}/kinds.csv`,
      "--node", String(node),
    ],
    { encoding: "utf-8" },
  );
  expect(result.status, result.stderr).toBe(0);
  const doc = JSON.parse(result.stdout) as DirectionResponse;
  return doc.nodes.filter((n) => n.kind === "Waterbody").map((n) => n.comid);
}

describe("workspace loading", () => {
  it("pulls metadata and drawable layers", async () => {
    const api = client();
    const state = new UiState();
    const loaded = await loadWorkspace(api, state);
    expect(loaded.snapshotId).toBeTruthy();
    expect(state.layers.get("waterbodies")?.features.length).toBe(5);
    expect(state.layers.get("rivers")?.features.length).toBe(8);
    expect(state.layers.get("watersheds")?.features.length).toBe(2);
    expect(state.viewport).not.toBeNull();
  });
});

describe("divergent what-if placements", () => {
  it("two nearby clicks in different basins highlight disjoint sets equal to the CLI output", async () => {
    const api = client();
    const state = new UiState();
    await loadWorkspace(api, state);

    const left = await placeWhatIf(api, state, LEFT_CLICK, "left");
    const right = await placeWhatIf(api, state, RIGHT_CLICK, "right");
    expect(left.ok && right.ok).toBe(true);
    if (!left.ok || !right.ok) return;

    // different watersheds despite the small separation
    expect(left.entry.sourceHuc12).not.toBe(right.entry.sourceHuc12);

    // disjoint downstream waterbody sets
    const leftSet = new Set(left.entry.downstreamWaterbodies);
    for (const comid of right.entry.downstreamWaterbodies) {
      expect(leftSet.has(comid)).toBe(false);
    }
    expect(left.entry.downstreamWaterbodies.length).toBeGreaterThan(0);
    expect(right.entry.downstreamWaterbodies.length).toBeGreaterThan(0);

    // highlighted sets equal the CLI downstream outputs for the attached nodes
    expect(left.entry.downstreamWaterbodies).toEqual(
      cliDownstreamWaterbodies(left.entry.attachedNode),
    );
    expect(right.entry.downstreamWaterbodies).toEqual(
      cliDownstreamWaterbodies(right.entry.attachedNode),
    );

    // both slots present, rendered with distinct accents
    const scene = renderScene(state);
    const highlights = highlightIndex(state);
    expect(new Set(highlights.values())).toEqual(new Set([0, 1]));
    expect(JSON.stringify(scene)).toContain("data-highlight-slot");
  });

  it("repeated placement at one point renders identical panel entries", async () => {
    const api = client();
    const state = new UiState();
    await loadWorkspace(api, state);

    const first = await placeWhatIf(api, state, LEFT_CLICK, "same");
    const second = await placeWhatIf(api, state, LEFT_CLICK, "same");
    expect(first.ok && second.ok).toBe(true);
    if (!first.ok || !second.ok) return;
    expect(second.entry).toEqual(first.entry);
    expect(state.comparison.length).toBe(2);
    expect(state.comparison[0]).toEqual(state.comparison[1]);
  });

  it("clicks outside every watershed produce a toastable error and no panel entry", async () => {
    const api = client();
    const state = new UiState();
    await loadWorkspace(api, state);

    const outcome = await placeWhatIf(api, state, { x: 9_999, y: 9_999 });
    expect(outcome.ok).toBe(false);
    if (outcome.ok) return;
    expect(outcome.reason).toBe("outside-watersheds");
    expect(state.comparison.length).toBe(0);
  });

  it("the raw 422 carries the watershed message", async () => {
    const api = client();
    await expect(api.whatIf(9_999, 9_999, "x")).rejects.toBeInstanceOf(
      OutsideWatershedsError,
    );
  });
});

describe("node selection", () => {
  it("downstream highlight of a selected waterbody comes from the service", async () => {
    const api = client();
    const state = new UiState();
    await loadWorkspace(api, state);
    const waterbodies = await selectNodeDownstream(api, state, 101);
    expect(waterbodies).toEqual(cliDownstreamWaterbodies(101));
    expect(state.selection).toEqual({ kind: "node", comid: 101 });
  });
});

describe("request discipline", () => {
  it("concurrent identical requests share one in-flight promise", async () => {
    const api = client();
    const a = api.whatIf(LEFT_CLICK.x, LEFT_CLICK.y, "dup");
    const b = api.whatIf(LEFT_CLICK.x, LEFT_CLICK.y, "dup");
    expect(api.pendingCount).toBe(1);
    const [ra, rb] = await Promise.all([a, b]);
    expect(ra).toEqual(rb);
    expect(api.pendingCount).toBe(0);
  });

  it("snapshot ids stay constant across queries on one snapshot", async () => {
    const api = client();
    const meta = await api.meta();
    const whatif = await api.whatIf(LEFT_CLICK.x, LEFT_CLICK.y, "snap");
    const down = await api.downstream(101);
    expect(whatif.snapshot_id).toBe(meta.snapshot_id);
    expect(down.snapshotId).toBe(meta.snapshot_id);
  });
});
