"""Workspace directory layout and the small CSV sidecar formats.

A workspace holds one graph snapshot: edges.csv plus kinds.csv/hucs.csv
sidecars, optional aggregated edges and merge map, optional geometry
layers (GeoJSON), and the TOML config. Loading is read-only; the service
swaps whole Workspace objects atomically on reload.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

from . import geo
from .builder import PointSourceRecord
from .graphcore import HydroGraph, NodeKind, build_graph
from .ingest import (
    EngineConfig,
    FeatureKind,
    FeatureRecord,
    FlowEdge,
    ParseError,
    _as_text,
    _header_index,
    geometry_to_geojson,
    load_config,
    parse_features,
    parse_flow_table,
    serialize_flow_table,
)

EDGES_FILE = "edges.csv"
KINDS_FILE = "kinds.csv"
HUCS_FILE = "hucs.csv"
AGGREGATED_EDGES_FILE = "edges_agg.csv"
MERGES_FILE = "merges.csv"
WATERBODIES_FILE = "waterbodies.geojson"
RIVERS_FILE = "rivers.geojson"
WATERSHEDS_FILE = "watersheds.geojson"
SOURCES_FILE = "point_sources.geojson"
AG_FILE = "ag.geojson"
URBAN_FILE = "urban.geojson"
CONFIG_FILE = "config.toml"


def serialize_kinds(kinds: dict[int, NodeKind]) -> str:
    lines = ["COMID,KIND"]
    lines.extend(f"{c},{k.value}" for c, k in sorted(kinds.items()))
    return "\n".join(lines) + "\n"


def parse_kinds(stream: str | IO[str]) -> dict[int, NodeKind]:
    reader = csv.reader(_as_text(stream))
    header = next(reader, None)
    if header is None:
        raise ParseError("missing required column COMID")
    ci = _header_index(header, "COMID")
    ki = _header_index(header, "KIND")
    out: dict[int, NodeKind] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            out[int(row[ci])] = NodeKind(row[ki].strip())
        except (ValueError, IndexError):
            raise ParseError(f"bad kind row at line {lineno}") from None
    return out


def serialize_hucs(hucs: dict[int, str]) -> str:
    lines = ["COMID,HUC12"]
    lines.extend(f"{c},{h}" for c, h in sorted(hucs.items()))
    return "\n".join(lines) + "\n"


def parse_hucs(stream: str | IO[str]) -> dict[int, str]:
    reader = csv.reader(_as_text(stream))
    header = next(reader, None)
    if header is None:
        raise ParseError("missing required column COMID")
    ci = _header_index(header, "COMID")
    hi = _header_index(header, "HUC12")
    out: dict[int, str] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            out[int(row[ci])] = row[hi].strip()
        except (ValueError, IndexError):
            raise ParseError(f"bad huc row at line {lineno}") from None
    return out


def serialize_merges(merged_into: dict[int, int]) -> str:
    lines = ["MERGED_COMID,SURVIVOR_COMID"]
    lines.extend(f"{m},{s}" for m, s in sorted(merged_into.items()))
    return "\n".join(lines) + "\n"


def parse_merges(stream: str | IO[str]) -> dict[int, int]:
    reader = csv.reader(_as_text(stream))
    header = next(reader, None)
    if header is None:
        raise ParseError("missing required column MERGED_COMID")
    mi = _header_index(header, "MERGED_COMID")
    si = _header_index(header, "SURVIVOR_COMID")
    out: dict[int, int] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            out[int(row[mi])] = int(row[si])
        except (ValueError, IndexError):
            raise ParseError(f"bad merge row at line {lineno}") from None
    return out


def features_to_geojson(records: list[FeatureRecord]) -> str:
    """FeatureCollection text for a list of records (stable key order)."""
    features = []
    for r in records:
        props: dict = {}
        if r.comid is not None:
            props["COMID"] = r.comid
        if r.wbic is not None:
            props["WBIC"] = r.wbic
        if r.ftype is not None:
            props["FTYPE"] = r.ftype
        if r.huc12 is not None:
            props["HUC12"] = r.huc12
        features.append(
            {
                "type": "Feature",
                "properties": props,
                "geometry": geometry_to_geojson(r.geometry),
            }
        )
    return json.dumps(
        {"type": "FeatureCollection", "features": features}, sort_keys=True
    )


def sources_to_geojson(sources: list[PointSourceRecord]) -> str:
    features = [
        {
            "type": "Feature",
            "properties": {
                "SOURCE_ID": s.source_id,
                "LABEL": s.label,
                "HUC12": s.huc12,
            },
            "geometry": {
                "type": "Point",
                "coordinates": [s.location.x, s.location.y],
            },
        }
        for s in sources
    ]
    return json.dumps(
        {"type": "FeatureCollection", "features": features}, sort_keys=True
    )


def subgraph_geojson(ws: "Workspace", comids) -> str:
    """Member geometries of a subgraph as a FeatureCollection.

    Nodes without stored geometry (point sources) fall back to their
    centroid as a Point feature; nodes with neither are omitted.
    """
    features = []
    for c in sorted(set(comids)):
        geom = ws.geometries.get(c)
        if geom is not None:
            geometry = geometry_to_geojson(geom)
        else:
            p = ws.centroids.get(c)
            if p is None:
                continue
            geometry = {"type": "Point", "coordinates": [p.x, p.y]}
        props = {"COMID": c}
        if ws.graph.has_node(c):
            props["KIND"] = ws.graph.kind(c).value
            if ws.graph.huc(c) is not None:
                props["HUC12"] = ws.graph.huc(c)
        features.append(
            {"type": "Feature", "properties": props, "geometry": geometry}
        )
    return json.dumps(
        {"type": "FeatureCollection", "features": features}, sort_keys=True
    )


def parse_sources_geojson(text: str) -> list[PointSourceRecord]:
    doc = json.loads(text)
    out = []
    for f in doc.get("features", []):
        props = f.get("properties") or {}
        x, y = f["geometry"]["coordinates"][:2]
        out.append(
            PointSourceRecord(
                source_id=int(props["SOURCE_ID"]),
                label=str(props.get("LABEL", "")),
                location=geo.Point(float(x), float(y)),
                huc12=props.get("HUC12"),
            )
        )
    return out


@dataclass
class Workspace:
    """One loaded snapshot: graph, optional aggregation, geometry layers."""

    root: Path
    graph: HydroGraph
    aggregated: HydroGraph | None = None
    merge_map: dict[int, int] = field(default_factory=dict)
    geometries: dict[int, object] = field(default_factory=dict)
    centroids: dict[int, geo.Point] = field(default_factory=dict)
    watersheds: list[FeatureRecord] = field(default_factory=list)
    ag_cover: list = field(default_factory=list)
    urban_cover: list = field(default_factory=list)
    config: EngineConfig = field(default_factory=EngineConfig)
    snapshot_id: str = ""
    summaries: dict[int, dict] = field(default_factory=dict)

    @staticmethod
    def load(root: str | Path) -> "Workspace":
        root = Path(root)
        edges_text = (root / EDGES_FILE).read_text(encoding="utf-8")
        edges = parse_flow_table(edges_text)
        kinds = (
            parse_kinds((root / KINDS_FILE).read_text(encoding="utf-8"))
            if (root / KINDS_FILE).exists()
            else {}
        )
        hucs = (
            parse_hucs((root / HUCS_FILE).read_text(encoding="utf-8"))
            if (root / HUCS_FILE).exists()
            else {}
        )
        graph = build_graph(edges, kinds, hucs)

        aggregated = None
        merge_map: dict[int, int] = {}
        if (root / AGGREGATED_EDGES_FILE).exists():
            agg_edges = parse_flow_table(
                (root / AGGREGATED_EDGES_FILE).read_text(encoding="utf-8")
            )
            if (root / MERGES_FILE).exists():
                merge_map = parse_merges(
                    (root / MERGES_FILE).read_text(encoding="utf-8")
                )
            survivors = [c for c in graph.nodes() if c not in merge_map]
            aggregated = build_graph(agg_edges, kinds, hucs, extra_nodes=survivors)

        geometries: dict[int, object] = {}
        watersheds: list[FeatureRecord] = []
        source_locations: dict[int, geo.Point] = {}
        for name, kind in (
            (WATERBODIES_FILE, FeatureKind.WATERBODY),
            (RIVERS_FILE, FeatureKind.RIVER_SEGMENT),
        ):
            path = root / name
            if path.exists():
                for rec in parse_features(path.read_text(encoding="utf-8"), kind):
                    geometries[rec.comid] = rec.geometry
        if (root / WATERSHEDS_FILE).exists():
            watersheds = parse_features(
                (root / WATERSHEDS_FILE).read_text(encoding="utf-8"),
                FeatureKind.WATERSHED,
            )
        if (root / SOURCES_FILE).exists():
            for src in parse_sources_geojson(
                (root / SOURCES_FILE).read_text(encoding="utf-8")
            ):
                source_locations[src.source_id] = src.location

        ag_cover = []
        urban_cover = []
        if (root / AG_FILE).exists():
            ag_cover = [
                r.geometry
                for r in parse_features(
                    (root / AG_FILE).read_text(encoding="utf-8"),
                    FeatureKind.LAND_COVER,
                )
            ]
        if (root / URBAN_FILE).exists():
            urban_cover = [
                r.geometry
                for r in parse_features(
                    (root / URBAN_FILE).read_text(encoding="utf-8"),
                    FeatureKind.LAND_COVER,
                )
            ]
        config = (
            load_config((root / CONFIG_FILE).read_bytes())
            if (root / CONFIG_FILE).exists()
            else EngineConfig()
        )

        centroids = {
            c: geo.centroid(g) for c, g in geometries.items() if graph.has_node(c)
        }
        centroids.update(source_locations)

        digest = hashlib.sha256(edges_text.encode("utf-8"))
        for name in (KINDS_FILE, HUCS_FILE, AGGREGATED_EDGES_FILE, MERGES_FILE):
            path = root / name
            if path.exists():
                digest.update(path.read_bytes())
        return Workspace(
            root=root,
            graph=graph,
            aggregated=aggregated,
            merge_map=merge_map,
            geometries=geometries,
            centroids=centroids,
            watersheds=watersheds,
            ag_cover=ag_cover,
            urban_cover=urban_cover,
            config=config,
            snapshot_id=digest.hexdigest()[:12],
        )


def save_workspace(
    root: str | Path,
    edges: list[FlowEdge],
    kinds: dict[int, NodeKind],
    hucs: dict[int, str],
    waterbodies: list[FeatureRecord] | None = None,
    rivers: list[FeatureRecord] | None = None,
    watersheds: list[FeatureRecord] | None = None,
    sources: list[PointSourceRecord] | None = None,
    config_text: str | None = None,
) -> Path:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    (root / EDGES_FILE).write_text(serialize_flow_table(edges), encoding="utf-8")
    (root / KINDS_FILE).write_text(serialize_kinds(kinds), encoding="utf-8")
    (root / HUCS_FILE).write_text(serialize_hucs(hucs), encoding="utf-8")
    if waterbodies is not None:
        (root / WATERBODIES_FILE).write_text(
            features_to_geojson(waterbodies), encoding="utf-8"
        )
    if rivers is not None:
        (root / RIVERS_FILE).write_text(
            features_to_geojson(rivers), encoding="utf-8"
        )
    if watersheds is not None:
        (root / WATERSHEDS_FILE).write_text(
            features_to_geojson(watersheds), encoding="utf-8"
        )
    if sources is not None:
        (root / SOURCES_FILE).write_text(
            sources_to_geojson(sources), encoding="utf-8"
        )
    if config_text is not None:
        (root / CONFIG_FILE).write_text(config_text, encoding="utf-8")
    return root
