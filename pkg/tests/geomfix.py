"""Small geometry constructors shared across test modules."""

from __future__ import annotations

import math
import random

from hydrograph.geo import MultiPolygon, Point, Polygon, PolyLine


def square(x0: float, y0: float, x1: float, y1: float) -> Polygon:
    return Polygon(
        [Point(x0, y0), Point(x1, y0), Point(x1, y1), Point(x0, y1), Point(x0, y0)]
    )


def ring(*coords) -> tuple[Point, ...]:
    return tuple(Point(x, y) for x, y in coords)


def line(*coords) -> PolyLine:
    return PolyLine([Point(x, y) for x, y in coords])


def unit_square() -> Polygon:
    return square(0, 0, 1, 1)


def random_convex_polygon(rng: random.Random, max_radius: float = 4.0) -> Polygon:
    """Simple (convex) polygon: random points on a circle, sorted by angle."""
    cx, cy = rng.uniform(-5, 5), rng.uniform(-5, 5)
    k = rng.randint(3, 9)
    angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(k))
    r = rng.uniform(0.5, max_radius)
    pts = [Point(cx + r * math.cos(a), cy + r * math.sin(a)) for a in angles]
    return Polygon(tuple(pts) + (pts[0],))


def random_star_polygon(rng: random.Random) -> Polygon:
    """Simple star-shaped polygon around a random center.

    Angles are jittered even spacing, keeping every angular gap under pi,
    which guarantees the radial chain never self-intersects.
    """
    cx, cy = rng.uniform(-3, 3), rng.uniform(-3, 3)
    k = rng.randint(4, 12)
    angles = [2 * math.pi * (i + 0.35 * rng.uniform(-1, 1)) / k for i in range(k)]
    pts = [
        Point(cx + rng.uniform(0.5, 3) * math.cos(a), cy + rng.uniform(0.5, 3) * math.sin(a))
        for a in angles
    ]
    return Polygon(tuple(pts) + (pts[0],))


def winding_number_inside(p: Point, poly: Polygon | MultiPolygon) -> bool:
    """Independent containment oracle: summed signed angles around p."""

    def ring_winding(r) -> int:
        total = 0.0
        for a, b in zip(r, r[1:]):
            ax, ay = a.x - p.x, a.y - p.y
            bx, by = b.x - p.x, b.y - p.y
            total += math.atan2(ax * by - ay * bx, ax * bx + ay * by)
        return round(total / (2 * math.pi))

    parts = poly.parts if isinstance(poly, MultiPolygon) else (poly,)
    for part in parts:
        w = ring_winding(part.exterior)
        for hole in part.holes:
            w += ring_winding(hole)
        if w != 0:
            return True
    return False
