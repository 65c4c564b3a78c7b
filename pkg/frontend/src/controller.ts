/** Interaction flows: thin orchestration between the API client and the
 * UI state. No graph math happens here; highlighted sets are exactly
 * what the service returned.
 */

import { ApiClient, OutsideWatershedsError, ServiceUnreachableError } from "./api.js";
import { UiState, entryFromResponse, type WhatIfEntry } from "./state.js";
import { LAYER_NAMES } from "./types.js";

export interface LoadResult {
  snapshotId: string;
  extent: [number, number, number, number] | null;
}

/** Fetch metadata and all drawable layers into the state. */
export async function loadWorkspace(api: ApiClient, state: UiState): Promise<LoadResult> {
  try {
    const meta = await api.meta();
    state.noteSnapshot(meta.snapshot_id);
    for (const name of LAYER_NAMES) {
      try {
        state.setLayer(name, await api.layer(name));
      } catch {
        // a workspace may lack optional layers (e.g. no point sources)
      }
    }
    if (meta.extent) state.viewport = meta.extent;
    state.serviceDown = false;
    return { snapshotId: meta.snapshot_id, extent: meta.extent };
  } catch (err) {
    if (err instanceof ServiceUnreachableError) {
      state.serviceDown = true;
    }
    throw err;
  }
}

export type WhatIfOutcome =
  | { ok: true; entry: WhatIfEntry }
  | { ok: false; reason: "outside-watersheds" | "unreachable"; message: string };

/** Place a hypothetical pollutant source at a clicked map point. */
export async function placeWhatIf(
  api: ApiClient,
  state: UiState,
  point: { x: number; y: number },
  label = "what-if source",
): Promise<WhatIfOutcome> {
  try {
    const response = await api.whatIf(point.x, point.y, label);
    const entry = entryFromResponse(point, label, response);
    state.addComparison(entry);
    return { ok: true, entry };
  } catch (err) {
    if (err instanceof OutsideWatershedsError) {
      return { ok: false, reason: "outside-watersheds", message: err.message };
    }
    if (err instanceof ServiceUnreachableError) {
      state.serviceDown = true;
      return { ok: false, reason: "unreachable", message: err.message };
    }
    throw err;
  }
}

/** Select a node and pull its downstream view for highlighting. */
export async function selectNodeDownstream(
  api: ApiClient,
  state: UiState,
  comid: number,
): Promise<number[]> {
  const { body, snapshotId } = await api.downstream(comid);
  state.noteSnapshot(snapshotId);
  state.selectNode(comid);
  return body.nodes
    .filter((n) => n.kind === "Waterbody")
    .map((n) => n.comid);
}
