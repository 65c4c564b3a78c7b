"""Builds the waterbody-aware graph from parsed features and a flow table.

River segments that intersect waterbody polygons get substituted by those
waterbodies in the edge list: segments touching exactly one waterbody are
replaced by it, segments touching several are replaced by all of them with
no edges among the waterbodies themselves (flow order within one segment
is not identifiable from the data, so none is invented). Also handles HUC
tagging by centroid containment, point-source attachment to the nearest
same-watershed node, and matching externally keyed lake polygons.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

from . import geo
from .geo import Point
from .graphcore import HydroGraph, NodeKind, build_graph
from .ingest import (
    FeatureKind,
    FeatureRecord,
    FlowEdge,
    ParseError,
    _as_text,
    _header_index,
)

# Synthetic point-source ids live far above NHD's COMID space.
SOURCE_ID_FLOOR = 10**12


@dataclass
class IntersectionIndex:
    """River-to-waterbody crossings, kept in both directions."""

    river_to_lakes: dict[int, list[int]]
    lake_to_rivers: dict[int, list[int]]


@dataclass
class PointSourceRecord:
    source_id: int
    label: str
    location: Point
    huc12: str | None = None

    def __post_init__(self) -> None:
        if self.source_id < SOURCE_ID_FLOOR:
            raise ValueError(
                f"source_id {self.source_id} below reserved range {SOURCE_ID_FLOOR}"
            )


def compute_intersections(
    rivers: list[FeatureRecord], lakes: list[FeatureRecord]
) -> IntersectionIndex:
    """Test every river segment against every waterbody polygon.

    Quadratic with a bounding-box prefilter; minutes at state scale, which
    is acceptable for a batch build. Lists come out ascending by COMID and
    the two directions stay exact mirrors.
    """
    index = IntersectionIndex(
        river_to_lakes={_comid(r): [] for r in rivers},
        lake_to_rivers={_comid(w): [] for w in lakes},
    )
    lake_boxes = [(w, geo.bbox(w.geometry)) for w in lakes]
    for river in rivers:
        rbox = geo.bbox(river.geometry)
        for lake, lbox in lake_boxes:
            if not geo._boxes_overlap(rbox, lbox):
                continue
            if geo.intersects(river.geometry, lake.geometry):
                index.river_to_lakes[_comid(river)].append(_comid(lake))
                index.lake_to_rivers[_comid(lake)].append(_comid(river))
    for lst in index.river_to_lakes.values():
        lst.sort()
    for lst in index.lake_to_rivers.values():
        lst.sort()
    return index


def _comid(record: FeatureRecord) -> int:
    if record.comid is None:
        raise ValueError(f"{record.kind.value} record has no COMID")
    return record.comid


def insert_waterbodies(
    edges: list[FlowEdge], index: IntersectionIndex
) -> list[FlowEdge]:
    """Substitute intersecting river COMIDs with waterbody COMIDs.

    Pass 1 replaces single-waterbody rivers one-for-one. Pass 2 fans each
    multi-waterbody river out to all of its waterbodies: predecessors gain
    an edge to each, successors gain an edge from each, and the waterbodies
    are deliberately not chained to each other. Self-loops produced by
    adjacent segments collapsing into one waterbody are dropped, output is
    deduped and sorted ascending by (from, to).
    """
    expansion: dict[int, list[int]] = {}
    for river, lakes in index.river_to_lakes.items():
        if len(lakes) == 1:
            expansion[river] = [lakes[0]]
        elif len(lakes) >= 2:
            expansion[river] = list(lakes)

    result: set[FlowEdge] = set()
    for frm, to in edges:
        for f in expansion.get(frm, [frm]):
            for t in expansion.get(to, [to]):
                if f != t:
                    result.add(FlowEdge(f, t))
    return sorted(result)


def substitution_counts(index: IntersectionIndex) -> tuple[int, int]:
    """(single-waterbody rivers, multi-waterbody rivers) in the index."""
    single = sum(1 for lakes in index.river_to_lakes.values() if len(lakes) == 1)
    multi = sum(1 for lakes in index.river_to_lakes.values() if len(lakes) >= 2)
    return single, multi


def assign_hucs(
    features: list[FeatureRecord], watersheds: list[FeatureRecord]
) -> tuple[dict[int, str], int]:
    """Map each feature to the HUC12 watershed containing its centroid.

    First watershed in input order wins, and boundary points count as
    contained, so a centroid on a shared border resolves deterministically.
    Features landing in no watershed are skipped; the second return value
    counts those misses.
    """
    ws_boxes = []
    for ws in watersheds:
        if ws.huc12 is None:
            raise ValueError("watershed record missing huc12")
        ws_boxes.append((ws, geo.bbox(ws.geometry)))

    assigned: dict[int, str] = {}
    misses = 0
    for feature in features:
        c = geo.centroid(feature.geometry)
        code = huc_for_point(c, watersheds, ws_boxes)
        if code is None:
            misses += 1
        else:
            assigned[_comid(feature)] = code
    return assigned, misses


def huc_for_point(
    p: Point,
    watersheds: list[FeatureRecord],
    _boxes=None,
) -> str | None:
    """HUC12 of the first watershed containing p, or None."""
    pairs = _boxes if _boxes is not None else [
        (ws, geo.bbox(ws.geometry)) for ws in watersheds
    ]
    for ws, box in pairs:
        if geo._box_contains(box, p) and geo.point_in_polygon(p, ws.geometry):
            return ws.huc12
    return None


def parse_point_sources(stream) -> list[PointSourceRecord]:
    """Parse a point-source CSV with columns SOURCE_ID(optional),LABEL,X,Y.

    Missing SOURCE_IDs are assigned sequentially from the reserved range.
    """
    reader = csv.reader(_as_text(stream))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("missing required column LABEL") from None
    li = _header_index(header, "LABEL")
    xi = _header_index(header, "X")
    yi = _header_index(header, "Y")
    try:
        si = _header_index(header, "SOURCE_ID")
    except ParseError:
        si = None

    sources: list[PointSourceRecord] = []
    auto_id = SOURCE_ID_FLOOR
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            x = float(row[xi])
            y = float(row[yi])
        except (ValueError, IndexError):
            raise ParseError(f"non-numeric coordinate at line {lineno}") from None
        if si is not None and row[si].strip():
            try:
                source_id = int(row[si])
            except ValueError:
                raise ParseError(
                    f"non-integer SOURCE_ID {row[si]!r} at line {lineno}"
                ) from None
        else:
            source_id = auto_id
        auto_id = max(auto_id, source_id) + 1
        sources.append(
            PointSourceRecord(source_id, row[li].strip(), Point(x, y))
        )
    return sources


def tag_sources_with_hucs(
    sources: list[PointSourceRecord], watersheds: list[FeatureRecord]
) -> list[PointSourceRecord]:
    """Fill huc12 for each source by locating it in the watershed layer."""
    boxes = [(ws, geo.bbox(ws.geometry)) for ws in watersheds]
    return [
        PointSourceRecord(
            s.source_id, s.label, s.location, huc_for_point(s.location, watersheds, boxes)
        )
        for s in sources
    ]


def nearest_node(
    location: Point,
    huc12: str,
    g: HydroGraph,
    node_centroids: dict[int, Point],
) -> int | None:
    """Closest non-source node in the same HUC12 by centroid distance.

    Ties break toward the lower COMID. Nodes without a known centroid
    cannot be measured and are not candidates.
    """
    best: tuple[float, int] | None = None
    for comid in g.nodes():
        if g.huc(comid) != huc12 or g.kind(comid) is NodeKind.POINT_SOURCE:
            continue
        c = node_centroids.get(comid)
        if c is None:
            continue
        key = (geo.squared_distance(c, location), comid)
        if best is None or key < best:
            best = key
    return best[1] if best else None


def attach_point_sources(
    g: HydroGraph,
    sources: list[PointSourceRecord],
    node_centroids: dict[int, Point],
) -> tuple[HydroGraph, list[PointSourceRecord]]:
    """Add one node and one outgoing edge per attachable source.

    A source attaches to the nearest same-HUC12 node; sources whose HUC12
    holds no graph node (or is unknown) are skipped and returned. Edges
    never point into a source.
    """
    kinds = {c: g.kind(c) for c in g.nodes()}
    hucs = {c: g.huc(c) for c in g.nodes() if g.huc(c) is not None}
    edges = list(g.edges())
    skipped: list[PointSourceRecord] = []
    for source in sources:
        if g.has_node(source.source_id):
            raise ValueError(f"source_id {source.source_id} already in graph")
        target = (
            nearest_node(source.location, source.huc12, g, node_centroids)
            if source.huc12 is not None
            else None
        )
        if target is None:
            skipped.append(source)
            continue
        kinds[source.source_id] = NodeKind.POINT_SOURCE
        hucs[source.source_id] = source.huc12
        edges.append(FlowEdge(source.source_id, target))
    return build_graph(edges, kinds, hucs), skipped


def match_external_lakes(
    external: list[FeatureRecord], lakes: list[FeatureRecord]
) -> dict[int, int]:
    """Match WBIC-keyed lake polygons to COMID-keyed waterbodies.

    Stage 1 takes the waterbody containing the external polygon's
    centroid. Stage 2, for shapes whose centroid falls outside themselves
    (crescents and the like), accepts an overlap with exactly one
    waterbody; zero or several overlaps stay unmatched.
    """
    lake_boxes = [(w, geo.bbox(w.geometry)) for w in lakes]
    matched: dict[int, int] = {}
    for ext in external:
        if ext.wbic is None:
            raise ValueError("external lake record has no WBIC")
        c = geo.centroid(ext.geometry)
        hit = None
        for lake, box in lake_boxes:
            if geo._box_contains(box, c) and geo.point_in_polygon(c, lake.geometry):
                hit = _comid(lake)
                break
        if hit is not None:
            matched[ext.wbic] = hit
            continue
        ebox = geo.bbox(ext.geometry)
        overlapping = [
            _comid(lake)
            for lake, box in lake_boxes
            if geo._boxes_overlap(ebox, box)
            and geo.polygons_intersect(ext.geometry, lake.geometry)
        ]
        if len(overlapping) == 1:
            matched[ext.wbic] = overlapping[0]
    return matched


@dataclass
class BuildReport:
    """Counts from one build run, for the plain-text and JSON reports."""

    rivers_parsed: int = 0
    waterbodies_parsed: int = 0
    watersheds_parsed: int = 0
    marshes_dropped: int = 0
    exclusions_applied: int = 0
    flow_edges: int = 0
    edges_after_insertion: int = 0
    single_substitutions: int = 0
    multi_substitutions: int = 0
    huc_misses: int = 0
    sources_attached: int = 0
    sources_skipped: int = 0

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = ["build report"]
        lines.extend(f"  {k}: {v}" for k, v in sorted(self.__dict__.items()))
        return "\n".join(lines) + "\n"


@dataclass
class BuildResult:
    graph: HydroGraph
    edges: list[FlowEdge]
    kinds: dict[int, NodeKind]
    hucs: dict[int, str]
    geometries: dict[int, object]
    centroids: dict[int, Point]
    report: BuildReport
    waterbodies: list[FeatureRecord] = field(default_factory=list)
    rivers: list[FeatureRecord] = field(default_factory=list)
    watersheds: list[FeatureRecord] = field(default_factory=list)
    sources: list[PointSourceRecord] = field(default_factory=list)


def build_hydrograph(
    flow_edges: list[FlowEdge],
    rivers: list[FeatureRecord],
    waterbodies: list[FeatureRecord],
    watersheds: list[FeatureRecord],
    exclude: list[int] | None = None,
    sources: list[PointSourceRecord] | None = None,
) -> BuildResult:
    """Full build: filter, intersect, insert, tag, attach. One-stop shop
    for the CLI; the pieces remain callable on their own."""
    from .ingest import filter_waterbodies

    report = BuildReport(
        rivers_parsed=len(rivers),
        waterbodies_parsed=len(waterbodies),
        watersheds_parsed=len(watersheds),
        flow_edges=len(flow_edges),
    )
    exclude = exclude or []
    report.marshes_dropped = sum(1 for w in waterbodies if w.ftype == "SwampMarsh")
    kept = filter_waterbodies(waterbodies, exclude)
    report.exclusions_applied = len(waterbodies) - len(kept) - report.marshes_dropped

    index = compute_intersections(rivers, kept)
    report.single_substitutions, report.multi_substitutions = substitution_counts(index)
    edges = insert_waterbodies(flow_edges, index)
    report.edges_after_insertion = len(edges)

    hucs, report.huc_misses = assign_hucs(rivers + kept, watersheds)
    lake_comids = {_comid(w) for w in kept}
    node_ids = {c for e in edges for c in e}
    kinds = {
        c: (NodeKind.WATERBODY if c in lake_comids else NodeKind.RIVER)
        for c in node_ids
    }
    hucs = {c: h for c, h in hucs.items() if c in node_ids}

    geometries: dict[int, object] = {}
    centroids: dict[int, Point] = {}
    for rec in list(rivers) + list(kept):
        c = _comid(rec)
        if c in node_ids:
            geometries[c] = rec.geometry
            centroids[c] = geo.centroid(rec.geometry)

    graph = build_graph(edges, kinds, hucs)
    attached_sources: list[PointSourceRecord] = []
    if sources:
        tagged = tag_sources_with_hucs(sources, watersheds)
        graph, skipped = attach_point_sources(graph, tagged, centroids)
        skipped_ids = {s.source_id for s in skipped}
        attached_sources = [s for s in tagged if s.source_id not in skipped_ids]
        report.sources_attached = len(attached_sources)
        report.sources_skipped = len(skipped)
        for s in attached_sources:
            centroids[s.source_id] = s.location
        edges = list(graph.edges())
        kinds = {c: graph.kind(c) for c in graph.nodes()}
        hucs = {c: graph.huc(c) for c in graph.nodes() if graph.huc(c) is not None}

    return BuildResult(
        graph=graph,
        edges=edges,
        kinds=kinds,
        hucs=hucs,
        geometries=geometries,
        centroids=centroids,
        report=report,
        waterbodies=kept,
        rivers=rivers,
        watersheds=watersheds,
        sources=attached_sources,
    )
