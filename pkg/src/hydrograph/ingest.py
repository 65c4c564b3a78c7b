"""Parsers and validators for the engine's four inputs: flow tables (CSV),
geometry files (GeoJSON FeatureCollections), point-source tables, and the
TOML config. Cleaning rules for flow tables (0-sentinel rows, duplicates,
self-loops) are applied here so downstream graph code can assume a clean
edge list.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable, NamedTuple

from .geo import GeometryError, MultiPolygon, Point, Polygon, PolyLine

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ParseError(ValueError):
    """Malformed or incomplete input data."""


class FeatureKind(Enum):
    RIVER_SEGMENT = "RiverSegment"
    WATERBODY = "Waterbody"
    WATERSHED = "Watershed"
    LAND_COVER = "LandCover"
    POINT_SOURCE = "PointSource"


class FlowEdge(NamedTuple):
    from_comid: int
    to_comid: int


@dataclass
class FeatureRecord:
    """One hydrological object: geometry plus identifying attributes.

    Rivers and waterbodies are COMID-keyed; watersheds are HUC12-keyed;
    externally sourced lake polygons are WBIC-keyed. `intersecting` is
    filled later by the graph builder.
    """

    kind: FeatureKind
    geometry: PolyLine | Polygon | MultiPolygon
    comid: int | None = None
    wbic: int | None = None
    ftype: str | None = None
    huc12: str | None = None
    intersecting: list[int] = field(default_factory=list)


def validate_comid(value: int) -> int:
    if value <= 0:
        raise ParseError(f"COMID must be positive, got {value}")
    return value


def validate_huc12(code: str) -> str:
    if len(code) != 12 or not code.isdigit():
        raise ParseError(f"HUC12 must be 12 decimal digits, got {code!r}")
    return code


def huc10(code: str) -> str:
    return code[:10]


def huc8(code: str) -> str:
    return code[:8]


def _as_text(stream: str | IO[str]) -> IO[str]:
    return io.StringIO(stream) if isinstance(stream, str) else stream


def _header_index(header: list[str], name: str) -> int:
    wanted = name.upper()
    for i, col in enumerate(header):
        if col.strip().upper() == wanted:
            return i
    raise ParseError(f"missing required column {name}")


def parse_flow_table(stream: str | IO[str]) -> list[FlowEdge]:
    """Parse a PlusFlow-style CSV into a cleaned directed edge list.

    Requires FROMCOMID and TOCOMID columns (case-insensitive, any order;
    extra columns ignored). Rows with a 0 sentinel in either column are
    dropped, as are self-loops and exact duplicates. Output preserves
    first-occurrence input order.
    """
    reader = csv.reader(_as_text(stream))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("missing required column FROMCOMID") from None
    fi = _header_index(header, "FROMCOMID")
    ti = _header_index(header, "TOCOMID")

    edges: list[FlowEdge] = []
    seen: set[FlowEdge] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        cells = []
        for idx, name in ((fi, "FROMCOMID"), (ti, "TOCOMID")):
            raw = row[idx].strip() if idx < len(row) else ""
            try:
                cells.append(int(raw))
            except ValueError:
                raise ParseError(
                    f"non-integer {name} {raw!r} at line {lineno}"
                ) from None
        frm, to = cells
        if frm == 0 or to == 0:
            continue
        validate_comid(frm)
        validate_comid(to)
        if frm == to:
            continue
        edge = FlowEdge(frm, to)
        if edge in seen:
            continue
        seen.add(edge)
        edges.append(edge)
    return edges


def serialize_flow_table(edges: Iterable[FlowEdge]) -> str:
    """Inverse of parse_flow_table: FROMCOMID,TOCOMID CSV in given order."""
    lines = ["FROMCOMID,TOCOMID"]
    lines.extend(f"{e.from_comid},{e.to_comid}" for e in edges)
    return "\n".join(lines) + "\n"


def _points_from_positions(positions, where: str) -> list[Point]:
    pts = []
    for pos in positions:
        if (
            not isinstance(pos, (list, tuple))
            or len(pos) < 2
            or not all(isinstance(v, (int, float)) for v in pos[:2])
        ):
            raise ParseError(f"malformed coordinate in {where}")
        pts.append(Point(float(pos[0]), float(pos[1])))
    return pts


def _polygon_from_rings(rings, where: str) -> Polygon:
    if not isinstance(rings, list) or not rings:
        raise ParseError(f"malformed geometry nesting in {where}")
    converted = []
    for ring in rings:
        pts = _points_from_positions(ring, where)
        if len(pts) < 4 or pts[0] != pts[-1]:
            raise ParseError(f"unclosed ring in {where}")
        converted.append(tuple(pts))
    try:
        return Polygon(converted[0], tuple(converted[1:]))
    except GeometryError as exc:
        raise ParseError(f"{exc} in {where}") from None


def _geometry_from_geojson(obj, where: str) -> PolyLine | Polygon | MultiPolygon:
    if not isinstance(obj, dict) or not obj.get("coordinates"):
        raise ParseError(f"empty geometry in {where}")
    gtype = obj.get("type")
    coords = obj["coordinates"]
    try:
        if gtype == "LineString":
            return PolyLine(tuple(_points_from_positions(coords, where)))
        if gtype == "Polygon":
            return _polygon_from_rings(coords, where)
        if gtype == "MultiPolygon":
            if not isinstance(coords, list) or not coords:
                raise ParseError(f"malformed geometry nesting in {where}")
            return MultiPolygon(
                tuple(_polygon_from_rings(rings, where) for rings in coords)
            )
    except GeometryError as exc:
        raise ParseError(f"{exc} in {where}") from None
    raise ParseError(f"unsupported geometry type {gtype!r} in {where}")


def geometry_to_geojson(g: PolyLine | Polygon | MultiPolygon) -> dict:
    """Geometry back to a GeoJSON geometry object (positions as [x, y])."""
    if isinstance(g, PolyLine):
        return {
            "type": "LineString",
            "coordinates": [[p.x, p.y] for p in g.vertices],
        }
    if isinstance(g, Polygon):
        rings = [[[p.x, p.y] for p in ring] for ring in g.rings()]
        return {"type": "Polygon", "coordinates": rings}
    return {
        "type": "MultiPolygon",
        "coordinates": [
            [[[p.x, p.y] for p in ring] for ring in part.rings()]
            for part in g.parts
        ],
    }


_ID_PROPERTY = {
    FeatureKind.RIVER_SEGMENT: "COMID",
    FeatureKind.WATERBODY: "COMID",
    FeatureKind.WATERSHED: "HUC12",
    FeatureKind.LAND_COVER: None,
}


def parse_features(
    stream: str | IO[str],
    kind: FeatureKind,
    id_property: str | None = None,
) -> list[FeatureRecord]:
    """Parse a GeoJSON FeatureCollection into records of one kind.

    The identifying property defaults per kind (COMID for rivers and
    waterbodies, HUC12 for watersheds, none for land cover); pass
    id_property="WBIC" for externally sourced lake polygons.
    """
    text = stream if isinstance(stream, str) else stream.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ParseError("expected a GeoJSON FeatureCollection")
    features = doc.get("features")
    if not isinstance(features, list):
        raise ParseError("FeatureCollection has no features list")

    key = id_property if id_property is not None else _ID_PROPERTY[kind]
    records: list[FeatureRecord] = []
    for i, feature in enumerate(features):
        where = f"feature index {i}"
        props = feature.get("properties") or {}
        geometry = _geometry_from_geojson(feature.get("geometry"), where)
        if kind is FeatureKind.RIVER_SEGMENT and not isinstance(geometry, PolyLine):
            raise ParseError(f"river segment needs LineString geometry at {where}")
        if kind is not FeatureKind.RIVER_SEGMENT and isinstance(geometry, PolyLine):
            raise ParseError(f"{kind.value} needs polygon geometry at {where}")

        record = FeatureRecord(kind=kind, geometry=geometry)
        if key is not None:
            if key not in props or props[key] in (None, ""):
                raise ParseError(f"missing {key} at {where}")
            raw = props[key]
            if key == "HUC12":
                record.huc12 = validate_huc12(str(raw))
            elif key == "WBIC":
                record.wbic = int(raw)
            else:
                record.comid = validate_comid(int(raw))
        if kind is FeatureKind.WATERBODY and "FTYPE" in props:
            record.ftype = str(props["FTYPE"])
        if kind is not FeatureKind.WATERSHED and props.get("HUC12"):
            record.huc12 = validate_huc12(str(props["HUC12"]))
        records.append(record)
    return records


def filter_waterbodies(
    records: list[FeatureRecord], exclude: Iterable[int] = ()
) -> list[FeatureRecord]:
    """Drop swamp/marsh records (FTYPE "SwampMarsh") and excluded COMIDs.

    The exclusion list is configuration, not policy: Great Lakes style
    exclusions stay reversible by emptying it.
    """
    excluded = set(exclude)
    return [
        r
        for r in records
        if r.ftype != "SwampMarsh" and r.comid not in excluded
    ]


@dataclass
class EngineConfig:
    """Knobs from the TOML config file."""

    exclude_comids: list[int] = field(default_factory=list)
    grid_step: float | None = None
    crs_note: str = ""
    crs_units: str = "meters"

    def __post_init__(self) -> None:
        if self.crs_units not in ("meters", "degrees"):
            raise ParseError(f"unknown crs_units {self.crs_units!r}")
        if self.grid_step is not None and self.grid_step <= 0:
            raise ParseError("grid_step must be positive")


def load_config(stream: str | bytes | IO[bytes]) -> EngineConfig:
    if isinstance(stream, str):
        data = tomllib.loads(stream)
    elif isinstance(stream, bytes):
        data = tomllib.loads(stream.decode("utf-8"))
    else:
        data = tomllib.load(stream)
    known = {"exclude_comids", "grid_step", "crs_note", "crs_units"}
    unknown = set(data) - known
    if unknown:
        raise ParseError(f"unknown config keys: {sorted(unknown)}")
    return EngineConfig(
        exclude_comids=[validate_comid(int(c)) for c in data.get("exclude_comids", [])],
        grid_step=float(data["grid_step"]) if "grid_step" in data else None,
        crs_note=str(data.get("crs_note", "")),
        crs_units=str(data.get("crs_units", "meters")),
    )
