"""Planar geometry kernel for the connectivity engine.

Centroids, point containment, line/polygon intersection, shoelace areas,
and grid-sampled land-cover fractions. Everything operates on bare planar
coordinates in whatever single CRS the caller's data shares; nothing here
reprojects or knows about ellipsoids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class GeometryError(ValueError):
    """Degenerate or structurally invalid geometry."""


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError("non-finite coordinate")


def _as_ring(raw) -> tuple[Point, ...]:
    ring = tuple(raw)
    if len(ring) < 4:
        raise GeometryError("ring needs at least 4 vertices including closure")
    if ring[0] != ring[-1]:
        raise GeometryError("ring is not closed")
    return ring


@dataclass(frozen=True)
class PolyLine:
    vertices: tuple[Point, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        if len(self.vertices) < 2:
            raise GeometryError("polyline needs at least 2 vertices")
        for a, b in zip(self.vertices, self.vertices[1:]):
            if a == b:
                raise GeometryError("consecutive duplicate vertices")


@dataclass(frozen=True)
class Polygon:
    exterior: tuple[Point, ...]
    holes: tuple[tuple[Point, ...], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "exterior", _as_ring(self.exterior))
        object.__setattr__(self, "holes", tuple(_as_ring(h) for h in self.holes))
        if _ring_area(self.exterior) == 0.0:
            raise GeometryError("exterior ring has zero area")

    def rings(self):
        yield self.exterior
        yield from self.holes


@dataclass(frozen=True)
class MultiPolygon:
    parts: tuple[Polygon, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise GeometryError("multipolygon needs at least 1 part")


AreaGeometry = Polygon | MultiPolygon
Geometry = PolyLine | Polygon | MultiPolygon


def _parts(g: AreaGeometry) -> tuple[Polygon, ...]:
    return g.parts if isinstance(g, MultiPolygon) else (g,)


def _ring_area(ring) -> float:
    """Signed shoelace area (positive for counterclockwise winding)."""
    acc = 0.0
    for a, b in zip(ring, ring[1:]):
        acc += a.x * b.y - b.x * a.y
    return acc / 2.0


def _ring_centroid(ring) -> tuple[float, float, float]:
    """(cx, cy, signed_area) of one closed ring."""
    a = _ring_area(ring)
    if a == 0.0:
        # zero-area ring carries zero weight; report the vertex mean
        xs = [p.x for p in ring[:-1]]
        ys = [p.y for p in ring[:-1]]
        return sum(xs) / len(xs), sum(ys) / len(ys), 0.0
    cx = cy = 0.0
    for p, q in zip(ring, ring[1:]):
        w = p.x * q.y - q.x * p.y
        cx += (p.x + q.x) * w
        cy += (p.y + q.y) * w
    return cx / (6.0 * a), cy / (6.0 * a), a


def bbox(g: Geometry | Point) -> tuple[float, float, float, float]:
    """(minx, miny, maxx, maxy). Polygon boxes use exterior rings only."""
    if isinstance(g, Point):
        return g.x, g.y, g.x, g.y
    if isinstance(g, PolyLine):
        pts = g.vertices
    elif isinstance(g, Polygon):
        pts = g.exterior
    else:
        pts = tuple(p for part in g.parts for p in part.exterior)
    xs = [p.x for p in pts]
    ys = [p.y for p in pts]
    return min(xs), min(ys), max(xs), max(ys)


def _boxes_overlap(a, b) -> bool:
    return a[0] <= b[2] and b[0] <= a[2] and a[1] <= b[3] and b[1] <= a[3]


def _box_contains(box, p: Point) -> bool:
    return box[0] <= p.x <= box[2] and box[1] <= p.y <= box[3]


def centroid(g: Geometry) -> Point:
    """Centroid of a geometry.

    Polygons use the area-weighted (shoelace) centroid with holes
    subtracting; polylines use the length-weighted centroid of their
    segments; multipolygons combine part centroids weighted by net area.
    """
    if isinstance(g, PolyLine):
        total = cx = cy = 0.0
        for a, b in zip(g.vertices, g.vertices[1:]):
            length = math.hypot(b.x - a.x, b.y - a.y)
            cx += (a.x + b.x) / 2.0 * length
            cy += (a.y + b.y) / 2.0 * length
            total += length
        if total == 0.0:
            raise GeometryError("degenerate geometry")
        return Point(cx / total, cy / total)

    weight = cx = cy = 0.0
    for part in _parts(g):
        ex, ey, ea = _ring_centroid(part.exterior)
        w = abs(ea)
        px, py = ex * w, ey * w
        for hole in part.holes:
            hx, hy, ha = _ring_centroid(hole)
            hw = abs(ha)
            px -= hx * hw
            py -= hy * hw
            w -= hw
        cx += px
        cy += py
        weight += w
    if weight <= 0.0:
        raise GeometryError("degenerate geometry")
    c = Point(cx / weight, cy / weight)
    minx, miny, maxx, maxy = bbox(g)
    assert minx <= c.x <= maxx and miny <= c.y <= maxy
    return c


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    """Exact test: p lies on the closed segment ab."""
    cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
    if cross != 0.0:
        return False
    return (
        min(a.x, b.x) <= p.x <= max(a.x, b.x)
        and min(a.y, b.y) <= p.y <= max(a.y, b.y)
    )


def point_in_polygon(p: Point, poly: AreaGeometry) -> bool:
    """Even-odd (ray casting) containment with holes honored.

    Points on any ring edge, hole edges included, count as inside so that
    a centroid sitting exactly on a watershed border still resolves.
    """
    for part in _parts(poly):
        crossings = 0
        on_edge = False
        for ring in part.rings():
            for a, b in zip(ring, ring[1:]):
                if _on_segment(p, a, b):
                    on_edge = True
                    break
                if (a.y > p.y) != (b.y > p.y):
                    x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)
                    if p.x < x_at:
                        crossings += 1
            if on_edge:
                break
        if on_edge or crossings % 2 == 1:
            return True
    return False


def _orient(a: Point, b: Point, c: Point) -> float:
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)


def _segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool:
    """Closed-segment intersection; touching endpoints count."""
    d1 = _orient(c, d, a)
    d2 = _orient(c, d, b)
    d3 = _orient(a, b, c)
    d4 = _orient(a, b, d)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and _on_segment(a, c, d):
        return True
    if d2 == 0 and _on_segment(b, c, d):
        return True
    if d3 == 0 and _on_segment(c, a, b):
        return True
    if d4 == 0 and _on_segment(d, a, b):
        return True
    return False


def intersects(line: PolyLine, poly: AreaGeometry) -> bool:
    """True when any line segment crosses or touches a ring edge, or any
    line vertex lies inside the polygon (containment counts)."""
    if not _boxes_overlap(bbox(line), bbox(poly)):
        return False
    for a, b in zip(line.vertices, line.vertices[1:]):
        for part in _parts(poly):
            for ring in part.rings():
                for c, d in zip(ring, ring[1:]):
                    if _segments_intersect(a, b, c, d):
                        return True
    return any(point_in_polygon(v, poly) for v in line.vertices)


def polygons_intersect(a: AreaGeometry, b: AreaGeometry) -> bool:
    """True when the two areas share boundary or interior points.

    Covers edge crossings, touches, and full containment either way.
    """
    if not _boxes_overlap(bbox(a), bbox(b)):
        return False
    edges_a = [
        (p, q)
        for part in _parts(a)
        for ring in part.rings()
        for p, q in zip(ring, ring[1:])
    ]
    edges_b = [
        (p, q)
        for part in _parts(b)
        for ring in part.rings()
        for p, q in zip(ring, ring[1:])
    ]
    for p, q in edges_a:
        for r, s in edges_b:
            if _segments_intersect(p, q, r, s):
                return True
    if any(point_in_polygon(part.exterior[0], b) for part in _parts(a)):
        return True
    return any(point_in_polygon(part.exterior[0], a) for part in _parts(b))


def area(poly: AreaGeometry) -> float:
    """Unsigned area in squared CRS units; holes subtract per part."""
    total = 0.0
    for part in _parts(poly):
        part_area = abs(_ring_area(part.exterior))
        part_area -= sum(abs(_ring_area(h)) for h in part.holes)
        if part_area < 0.0:
            raise GeometryError("invalid polygon")
        total += part_area
    return total


def squared_distance(a: Point, b: Point) -> float:
    """Squared Euclidean distance; callers only compare, so no sqrt."""
    return (a.x - b.x) ** 2 + (a.y - b.y) ** 2


def land_fraction(
    region: AreaGeometry,
    cover: list[AreaGeometry],
    grid_step: float,
) -> float:
    """Fraction of `region` covered by any geometry in `cover`.

    Sampled on a deterministic axis-aligned lattice over the region's
    bounding box, offset by half a step so samples sit at cell centers.
    Only lattice points inside the region are counted.

    Raises GeometryError when no lattice point lands inside the region
    ("grid too coarse").
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    minx, miny, maxx, maxy = bbox(region)
    nx = max(0, math.ceil((maxx - minx) / grid_step - 0.5))
    ny = max(0, math.ceil((maxy - miny) / grid_step - 0.5))
    cover_boxes = [bbox(c) for c in cover]

    in_region = 0
    covered = 0
    for j in range(ny):
        y = miny + (j + 0.5) * grid_step
        for i in range(nx):
            p = Point(minx + (i + 0.5) * grid_step, y)
            if not point_in_polygon(p, region):
                continue
            in_region += 1
            for cbox, cgeom in zip(cover_boxes, cover):
                if _box_contains(cbox, p) and point_in_polygon(p, cgeom):
                    covered += 1
                    break
    if in_region == 0:
        raise GeometryError("grid too coarse")
    return covered / in_region


def auto_grid_step(region: AreaGeometry, target_samples: int = 20_000) -> float:
    """Lattice spacing that puts roughly `target_samples` points in the
    region's bounding box (at least 10^4 in-region samples for compact
    regions)."""
    minx, miny, maxx, maxy = bbox(region)
    box_area = (maxx - minx) * (maxy - miny)
    if box_area <= 0:
        raise GeometryError("degenerate geometry")
    return math.sqrt(box_area / target_samples)
