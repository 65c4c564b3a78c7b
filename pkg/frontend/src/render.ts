/** Pure scene construction: GeoJSON layers to SVG element descriptors.
 *
 * Colors follow the engine's plotting convention: waterbodies blue,
 * rivers red. Point sources render as purple diamonds. Highlighted
 * waterbody sets (one per comparison slot) get slot accent strokes.
 * Everything here is data-in data-out so tests need no DOM.
 */

import type { Bbox, Feature, FeatureCollection, Geometry, LayerName, Position } from "./types.js";
import type { UiState } from "./state.js";

export const COLORS = {
  waterbody: "#2b6cb3",
  waterbodyEdge: "#1a4e86",
  river: "#c0392b",
  watershed: "#8a8f98",
  pointSource: "#7d3c98",
  slotAccents: ["#e69f00", "#009e73"],
  banner: "#b3261e",
} as const;

export interface SceneNode {
  tag: string;
  attrs: Record<string, string>;
  children?: SceneNode[];
  text?: string;
}

export interface Transform {
  scale: number;
  minX: number;
  maxY: number;
  width: number;
  height: number;
}

export function fitTransform(extent: Bbox, width: number, height: number): Transform {
  const [minX, minY, maxX, maxY] = extent;
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  const scale = Math.min(width / spanX, height / spanY);
  return { scale, minX, maxY, width, height };
}

/** Data coordinates to screen; the y axis flips. */
export function project(t: Transform, p: Position): [number, number] {
  return [(p[0] - t.minX) * t.scale, (t.maxY - p[1]) * t.scale];
}

function ringPath(t: Transform, ring: Position[]): string {
  return (
    ring
      .map((p, i) => {
        const [x, y] = project(t, p);
        return `${i === 0 ? "M" : "L"}${round(x)},${round(y)}`;
      })
      .join("") + "Z"
  );
}

function round(v: number): number {
  return Math.round(v * 100) / 100;
}

export function geometryToPath(t: Transform, geometry: Geometry): string {
  switch (geometry.type) {
    case "LineString":
      return geometry.coordinates
        .map((p, i) => {
          const [x, y] = project(t, p);
          return `${i === 0 ? "M" : "L"}${round(x)},${round(y)}`;
        })
        .join("");
    case "Polygon":
      return geometry.coordinates.map((ring) => ringPath(t, ring)).join("");
    case "MultiPolygon":
      return geometry.coordinates
        .map((rings) => rings.map((ring) => ringPath(t, ring)).join(""))
        .join("");
    case "Point": {
      const [x, y] = project(t, geometry.coordinates);
      // small diamond centered on the point
      return `M${round(x)},${round(y - 6)}L${round(x + 6)},${round(y)}L${round(x)},${round(y + 6)}L${round(x - 6)},${round(y)}Z`;
    }
  }
}

function comidOf(feature: Feature): number | null {
  const raw = feature.properties["COMID"] ?? feature.properties["comid"];
  return typeof raw === "number" ? raw : null;
}

function featureNode(
  t: Transform,
  feature: Feature,
  attrs: Record<string, string>,
): SceneNode {
  const comid = comidOf(feature);
  const base: Record<string, string> = { d: geometryToPath(t, feature.geometry), ...attrs };
  if (comid !== null) base["data-comid"] = String(comid);
  return { tag: "path", attrs: base };
}

const LAYER_STYLE: Record<LayerName, Record<string, string>> = {
  watersheds: {
    fill: "none",
    stroke: COLORS.watershed,
    "stroke-width": "1",
    "stroke-dasharray": "4 3",
  },
  waterbodies: {
    fill: COLORS.waterbody,
    "fill-opacity": "0.85",
    stroke: COLORS.waterbodyEdge,
    "stroke-width": "1",
  },
  rivers: {
    fill: "none",
    stroke: COLORS.river,
    "stroke-width": "1.5",
  },
  point_sources: {
    fill: COLORS.pointSource,
    stroke: "#4a235a",
    "stroke-width": "1",
  },
};

function layerGroup(
  t: Transform,
  name: LayerName,
  collection: FeatureCollection,
  highlights: Map<number, number>,
): SceneNode {
  const children = collection.features.map((feature) => {
    const style = { ...LAYER_STYLE[name] };
    const comid = comidOf(feature);
    if (name === "waterbodies" && comid !== null && highlights.has(comid)) {
      const slot = highlights.get(comid)!;
      style["stroke"] = COLORS.slotAccents[slot % COLORS.slotAccents.length]!;
      style["stroke-width"] = "3";
      style["fill-opacity"] = "1";
      style["data-highlight-slot"] = String(slot);
    }
    return featureNode(t, feature, style);
  });
  return { tag: "g", attrs: { "data-layer": name }, children };
}

function whatIfMarkers(t: Transform, state: UiState): SceneNode {
  const children = state.comparison.map((entry, slot) => {
    const [x, y] = project(t, [entry.point.x, entry.point.y]);
    return {
      tag: "circle",
      attrs: {
        cx: String(round(x)),
        cy: String(round(y)),
        r: "6",
        fill: COLORS.slotAccents[slot % COLORS.slotAccents.length]!,
        stroke: "#222",
        "stroke-width": "1.5",
        "data-whatif-slot": String(slot),
      },
    };
  });
  return { tag: "g", attrs: { "data-layer": "whatif-markers" }, children };
}

export interface LegendEntry {
  label: string;
  color: string;
  shape: "swatch" | "line" | "diamond";
}

export function legend(): LegendEntry[] {
  return [
    { label: "waterbody", color: COLORS.waterbody, shape: "swatch" },
    { label: "river", color: COLORS.river, shape: "line" },
    { label: "watershed", color: COLORS.watershed, shape: "line" },
    { label: "point source", color: COLORS.pointSource, shape: "diamond" },
  ];
}

/** Map waterbody COMID -> comparison slot index for highlighting. */
export function highlightIndex(state: UiState): Map<number, number> {
  const index = new Map<number, number>();
  state.highlightSets().forEach((set, slot) => {
    for (const comid of set) {
      if (!index.has(comid)) index.set(comid, slot);
    }
  });
  return index;
}

const LAYER_ORDER: LayerName[] = [
  "watersheds",
  "waterbodies",
  "rivers",
  "point_sources",
];

/** Build the full map scene for the current state. */
export function renderScene(
  state: UiState,
  width = 900,
  height = 500,
): SceneNode {
  const children: SceneNode[] = [];
  if (state.serviceDown) {
    return {
      tag: "g",
      attrs: { "data-role": "banner" },
      children: [
        {
          tag: "text",
          attrs: { x: "20", y: "30", fill: COLORS.banner, "data-role": "banner-text" },
          text: "service unreachable - check the server and retry",
        },
      ],
    };
  }
  if (!state.viewport) {
    return {
      tag: "g",
      attrs: { "data-role": "empty" },
      children: [
        {
          tag: "text",
          attrs: { x: "20", y: "30", fill: "#555" },
          text: "empty workspace - nothing to draw",
        },
      ],
    };
  }
  const t = fitTransform(state.viewport, width, height);
  const highlights = highlightIndex(state);
  for (const name of LAYER_ORDER) {
    const collection = state.layers.get(name);
    if (collection) children.push(layerGroup(t, name, collection, highlights));
  }
  children.push(whatIfMarkers(t, state));
  return { tag: "g", attrs: { "data-role": "map" }, children };
}

/** Materialize a scene under an SVG element (browser side). */
export function applyScene(scene: SceneNode, root: SVGElement): void {
  const doc = root.ownerDocument;
  while (root.firstChild) root.removeChild(root.firstChild);

  const build = (node: SceneNode): Element => {
    const el = doc.createElementNS("http://www.w3.org/2000/svg", node.tag);
    for (const [key, value] of Object.entries(node.attrs)) {
      el.setAttribute(key, value);
    }
    if (node.text) el.textContent = node.text;
    for (const child of node.children ?? []) {
      el.appendChild(build(child));
    }
    return el;
  };
  root.appendChild(build(scene));
}
