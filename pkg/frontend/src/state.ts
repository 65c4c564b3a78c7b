/** UI state: loaded layers, the active selection, and the comparison
 * panel holding the last two what-if results.
 *
 * Every service response echoes a snapshot id; when it changes (the
 * service reloaded its workspace) all derived state is stale and drops.
 */

import type { Bbox, FeatureCollection, LayerName, WhatIfResponse } from "./types.js";

export interface WhatIfEntry {
  /** Request key: the clicked coordinates. */
  key: string;
  label: string;
  snapshotId: string;
  point: { x: number; y: number };
  sourceHuc12: string;
  attachedNode: number;
  downstreamNodes: number[];
  downstreamWaterbodies: number[];
}

export function entryFromResponse(
  point: { x: number; y: number },
  label: string,
  response: WhatIfResponse,
): WhatIfEntry {
  return {
    key: `${point.x},${point.y}`,
    label,
    snapshotId: response.snapshot_id,
    point,
    sourceHuc12: response.source_huc12,
    attachedNode: response.attached_node,
    downstreamNodes: [...response.downstream_nodes],
    downstreamWaterbodies: [...response.downstream_waterbodies],
  };
}

export type Selection =
  | { kind: "node"; comid: number }
  | { kind: "whatif"; key: string }
  | null;

export const COMPARISON_SLOTS = 2;

export class UiState {
  viewport: Bbox | null = null;
  layers = new Map<LayerName, FeatureCollection>();
  selection: Selection = null;
  comparison: WhatIfEntry[] = [];
  snapshotId: string | null = null;
  serviceDown = false;

  /** Record a snapshot id; a change means every cached result is stale. */
  noteSnapshot(id: string | null): boolean {
    if (id === null) return false;
    if (this.snapshotId === null) {
      this.snapshotId = id;
      return false;
    }
    if (this.snapshotId === id) return false;
    this.snapshotId = id;
    this.comparison = [];
    this.selection = null;
    return true;
  }

  setLayer(name: LayerName, collection: FeatureCollection): void {
    this.layers.set(name, collection);
  }

  /** Add a what-if result; the panel keeps only the latest two entries. */
  addComparison(entry: WhatIfEntry): void {
    this.noteSnapshot(entry.snapshotId);
    this.comparison = [...this.comparison, entry].slice(-COMPARISON_SLOTS);
    this.selection = { kind: "whatif", key: entry.key };
  }

  selectNode(comid: number): void {
    this.selection = { kind: "node", comid };
  }

  clearSelection(): void {
    this.selection = null;
  }

  /** Waterbody COMIDs to highlight, per comparison slot. */
  highlightSets(): number[][] {
    return this.comparison.map((entry) => entry.downstreamWaterbodies);
  }
}
