/** Wire types for the hydrograph service API. */

export type Position = [number, number];

export interface LineStringGeometry {
  type: "LineString";
  coordinates: Position[];
}

export interface PolygonGeometry {
  type: "Polygon";
  coordinates: Position[][];
}

export interface MultiPolygonGeometry {
  type: "MultiPolygon";
  coordinates: Position[][][];
}

export interface PointGeometry {
  type: "Point";
  coordinates: Position;
}

export type Geometry =
  | LineStringGeometry
  | PolygonGeometry
  | MultiPolygonGeometry
  | PointGeometry;

export interface Feature {
  type: "Feature";
  properties: Record<string, unknown>;
  geometry: Geometry;
}

export interface FeatureCollection {
  type: "FeatureCollection";
  features: Feature[];
}

export type NodeKindName = "River" | "Waterbody" | "PointSource";

export interface MetaResponse {
  snapshot_id: string;
  nodes: number;
  edges: number;
  aggregated: boolean;
  extent: [number, number, number, number] | null;
}

export interface NodeListEntry {
  comid: number;
  kind: NodeKindName;
  huc12: string | null;
  x: number | null;
  y: number | null;
}

export interface NodesResponse {
  snapshot_id: string;
  nodes: NodeListEntry[];
  truncated: boolean;
}

export interface DirectionNode {
  comid: number;
  kind: NodeKindName;
  huc12: string | null;
}

/** Body of /upstream/{comid} and /downstream/{comid} (CLI-identical). */
export interface DirectionResponse {
  target: number;
  direction: "upstream" | "downstream";
  nodes: DirectionNode[];
  edges: [number, number][];
}

export interface WhatIfResponse {
  snapshot_id: string;
  source_huc12: string;
  attached_node: number;
  downstream_nodes: number[];
  downstream_waterbodies: number[];
  edges: [number, number][];
  subgraph: FeatureCollection;
}

export interface SummaryResponse {
  snapshot_id: string;
  target: number;
  upstream_nodes: number;
  upstream_waterbodies: number;
  upstream_waterbody_area_km2: number;
  cafos: number;
  ag_fraction: number;
  urban_fraction: number;
}

export type Bbox = [number, number, number, number];

export const LAYER_NAMES = [
  "watersheds",
  "waterbodies",
  "rivers",
  "point_sources",
] as const;

export type LayerName = (typeof LAYER_NAMES)[number];
