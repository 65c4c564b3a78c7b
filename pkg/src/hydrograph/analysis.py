"""Water-quality analytics over the graph.

Trophic state indices from total phosphorus and chlorophyll-a, cohort
classification of sampled lakes, per-lake upstream summaries (waterbody
counts and areas, point sources, land-cover fractions over the upstream
HUC12 watersheds), and the cohort metrics table.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from typing import IO

from . import geo
from .geo import MultiPolygon, Polygon
from .graphcore import Direction, HydroGraph, NodeKind, reachable_from
from .ingest import FeatureRecord, ParseError, _as_text, _header_index


class UnitsError(ValueError):
    """Area reporting requested for a CRS whose units are not meters."""


def tsi_tp(tp: float) -> float:
    """Carlson trophic state index from total phosphorus (mg/m^3).

    TSI = 4.15 + 14.42 ln(TP); strictly increasing in TP.
    """
    if tp <= 0:
        raise ValueError("TP concentration must be positive")
    return 4.15 + 14.42 * math.log(tp)


def tsi_chla(chla: float) -> float:
    """Carlson trophic state index from chlorophyll-a (mg/m^3).

    TSI = 30.6 + 9.81 ln(chl); strictly increasing in chl.
    """
    if chla <= 0:
        raise ValueError("chlorophyll-a concentration must be positive")
    return 30.6 + 9.81 * math.log(chla)


class LakeClass(Enum):
    CLEAN = "Clean"
    POLLUTED = "Polluted"
    NEITHER = "Neither"
    INSUFFICIENT_DATA = "InsufficientData"


@dataclass
class LakeSamples:
    comid: int
    tp: list[float]
    chla: list[float]

    def __post_init__(self) -> None:
        for series in (self.tp, self.chla):
            for v in series:
                if not math.isfinite(v) or v < 0:
                    raise ValueError(f"bad sample value {v} for lake {self.comid}")


@dataclass(frozen=True)
class ClassifyConfig:
    """Thresholds for cohort membership (concentrations in mg/m^3)."""

    min_count: int = 50
    clean_tp_max: float = 15.0
    clean_chla_max: float = 5.0
    polluted_tp_min: float = 60.0
    polluted_chla_min: float = 15.0

    def __post_init__(self) -> None:
        if min(self.clean_tp_max, self.clean_chla_max,
               self.polluted_tp_min, self.polluted_chla_min) <= 0:
            raise ValueError("thresholds must be positive")
        if self.clean_tp_max >= self.polluted_tp_min:
            raise ValueError("clean TP maximum must sit below polluted TP minimum")
        if self.clean_chla_max >= self.polluted_chla_min:
            raise ValueError("clean chl-a maximum must sit below polluted chl-a minimum")


def classify_lakes(
    samples: list[LakeSamples], cfg: ClassifyConfig = ClassifyConfig()
) -> dict[int, LakeClass]:
    """Label each sampled lake Clean, Polluted, Neither, or short on data.

    Arithmetic means of all reported measurements are compared against the
    thresholds; Clean needs both means strictly below the clean maxima,
    Polluted both strictly above the polluted minima. Lakes with fewer
    than min_count samples in either series are not classified.
    """
    out: dict[int, LakeClass] = {}
    for lake in samples:
        if len(lake.tp) < cfg.min_count or len(lake.chla) < cfg.min_count:
            out[lake.comid] = LakeClass.INSUFFICIENT_DATA
            continue
        mean_tp = sum(lake.tp) / len(lake.tp)
        mean_chla = sum(lake.chla) / len(lake.chla)
        if mean_tp < cfg.clean_tp_max and mean_chla < cfg.clean_chla_max:
            out[lake.comid] = LakeClass.CLEAN
        elif mean_tp > cfg.polluted_tp_min and mean_chla > cfg.polluted_chla_min:
            out[lake.comid] = LakeClass.POLLUTED
        else:
            out[lake.comid] = LakeClass.NEITHER
    return out


def parse_lake_samples(stream: str | IO[str]) -> list[LakeSamples]:
    """Parse a COMID,PARAM,VALUE CSV (PARAM is TP or CHLA) into per-lake
    sample series, ordered by first appearance."""
    reader = csv.reader(_as_text(stream))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("missing required column COMID") from None
    ci = _header_index(header, "COMID")
    pi = _header_index(header, "PARAM")
    vi = _header_index(header, "VALUE")

    lakes: dict[int, LakeSamples] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            comid = int(row[ci])
            value = float(row[vi])
        except (ValueError, IndexError):
            raise ParseError(f"bad sample row at line {lineno}") from None
        param = row[pi].strip().upper()
        if param not in ("TP", "CHLA"):
            raise ParseError(f"unknown PARAM {row[pi]!r} at line {lineno}")
        if not math.isfinite(value) or value < 0:
            raise ParseError(f"bad VALUE {row[vi]!r} at line {lineno}")
        lake = lakes.setdefault(comid, LakeSamples(comid, [], []))
        (lake.tp if param == "TP" else lake.chla).append(value)
    return list(lakes.values())


@dataclass
class UpstreamSummary:
    """What drains into one target node."""

    target: int
    upstream_nodes: int
    upstream_waterbodies: int
    upstream_waterbody_area_km2: float
    cafos: int
    ag_fraction: float
    urban_fraction: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def upstream_summary(
    g: HydroGraph,
    target: int,
    geoms: dict[int, object],
    watersheds: list[FeatureRecord],
    ag_cover: list[Polygon | MultiPolygon],
    urban_cover: list[Polygon | MultiPolygon],
    grid_step: float | None = None,
    crs_units: str = "meters",
) -> UpstreamSummary:
    """Summarize everything upstream of `target`.

    Waterbody area comes from the members' polygons (km^2, so the CRS
    must be meter-based; degree CRSs refuse rather than emit garbage).
    Land fractions are sampled over the union of HUC12 watersheds that
    contain the target or any upstream node, each watershed counted once.
    """
    if crs_units != "meters":
        raise UnitsError(
            f"area reporting needs a meter-based CRS, got {crs_units!r}"
        )
    upstream, _ = reachable_from(g, target, Direction.UPSTREAM)
    waterbodies = sorted(
        c for c in upstream if g.kind(c) is NodeKind.WATERBODY
    )
    area_m2 = sum(
        geo.area(geoms[c]) for c in waterbodies if c in geoms
    )
    cafos = sum(1 for c in upstream if g.kind(c) is NodeKind.POINT_SOURCE)

    codes = {g.huc(c) for c in upstream | {target} if g.huc(c) is not None}
    region_parts: list[Polygon] = []
    seen_codes: set[str] = set()
    for ws in watersheds:
        if ws.huc12 in codes and ws.huc12 not in seen_codes:
            seen_codes.add(ws.huc12)
            if isinstance(ws.geometry, MultiPolygon):
                region_parts.extend(ws.geometry.parts)
            else:
                region_parts.append(ws.geometry)

    ag_fraction = urban_fraction = 0.0
    if region_parts:
        region = MultiPolygon(tuple(region_parts))
        step = grid_step if grid_step is not None else geo.auto_grid_step(region)
        if ag_cover:
            ag_fraction = geo.land_fraction(region, ag_cover, step)
        if urban_cover:
            urban_fraction = geo.land_fraction(region, urban_cover, step)

    return UpstreamSummary(
        target=target,
        upstream_nodes=len(upstream),
        upstream_waterbodies=len(waterbodies),
        upstream_waterbody_area_km2=area_m2 / 1e6,
        cafos=cafos,
        ag_fraction=ag_fraction,
        urban_fraction=urban_fraction,
    )


@dataclass
class MetricsRow:
    """One cohort's indicator counts; fractions derive exactly as
    count/total."""

    cohort: str
    total: int
    cafo_connected: int
    in_graph: int
    headwater: int
    ag_over_20pct: int
    urban_over_2pct: int
    upstream_10plus: int

    _COUNT_FIELDS = (
        "cafo_connected",
        "in_graph",
        "headwater",
        "ag_over_20pct",
        "urban_over_2pct",
        "upstream_10plus",
    )

    def fractions(self) -> dict[str, float]:
        return {
            name: getattr(self, name) / self.total for name in self._COUNT_FIELDS
        }

    def to_dict(self) -> dict:
        out = {"cohort": self.cohort, "total": self.total}
        out.update({name: getattr(self, name) for name in self._COUNT_FIELDS})
        out["fractions"] = self.fractions()
        return out


AG_FRACTION_THRESHOLD = 0.20
URBAN_FRACTION_THRESHOLD = 0.02
UPSTREAM_NODE_THRESHOLD = 10


def metrics_table(
    g: HydroGraph,
    cohorts: dict[int, LakeClass],
    summaries: dict[int, UpstreamSummary],
    lake_hucs: dict[int, str] | None = None,
) -> list[MetricsRow]:
    """Indicator counts per cohort (Polluted first, then Clean).

    Graph facts (membership, headwater status, upstream node and CAFO
    counts) are recomputed from the graph; land fractions come from the
    supplied summaries. Lakes outside the graph count as CAFO-connected
    when a point source shares their HUC12, which needs `lake_hucs` for
    those lakes.
    """
    lake_hucs = lake_hucs or {}
    source_hucs = {
        g.huc(c)
        for c in g.nodes()
        if g.kind(c) is NodeKind.POINT_SOURCE and g.huc(c) is not None
    }

    rows = []
    for cohort in (LakeClass.POLLUTED, LakeClass.CLEAN):
        members = sorted(c for c, label in cohorts.items() if label is cohort)
        if not members:
            continue
        row = MetricsRow(cohort.value, len(members), 0, 0, 0, 0, 0, 0)
        for comid in members:
            summary = summaries.get(comid)
            if g.has_node(comid):
                row.in_graph += 1
                upstream, _ = reachable_from(g, comid, Direction.UPSTREAM)
                if not upstream:
                    row.headwater += 1
                if len(upstream) >= UPSTREAM_NODE_THRESHOLD:
                    row.upstream_10plus += 1
                if any(g.kind(c) is NodeKind.POINT_SOURCE for c in upstream):
                    row.cafo_connected += 1
            else:
                huc = lake_hucs.get(comid)
                if huc is not None and huc in source_hucs:
                    row.cafo_connected += 1
            if summary is not None:
                if summary.ag_fraction > AG_FRACTION_THRESHOLD:
                    row.ag_over_20pct += 1
                if summary.urban_fraction > URBAN_FRACTION_THRESHOLD:
                    row.urban_over_2pct += 1
        rows.append(row)
    return rows


def metrics_to_csv(rows: list[MetricsRow]) -> str:
    header = ["cohort", "measure", "total"] + list(MetricsRow._COUNT_FIELDS)
    lines = [",".join(header)]
    for row in rows:
        counts = [str(getattr(row, f)) for f in MetricsRow._COUNT_FIELDS]
        lines.append(",".join([row.cohort, "count", str(row.total)] + counts))
        fracs = row.fractions()
        lines.append(
            ",".join(
                [row.cohort, "fraction", ""]
                + [f"{fracs[f]:.4f}" for f in MetricsRow._COUNT_FIELDS]
            )
        )
    return "\n".join(lines) + "\n"
