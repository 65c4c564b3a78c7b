"""Directed waterbody-river connectivity graphs from NHDPlusV2-style data.

Builds a COMID-keyed directed graph from a flow table and geometry files,
aggregates it without changing which waterbodies reach which, and answers
upstream-source / downstream-impact queries with pollutant-relevant
metrics (trophic state indices, land fractions, point-source linkage).
"""

from .aggregate import MergeContext, aggregate, verify_connectivity
from .analysis import (
    ClassifyConfig,
    LakeClass,
    LakeSamples,
    MetricsRow,
    UpstreamSummary,
    classify_lakes,
    metrics_table,
    tsi_chla,
    tsi_tp,
    upstream_summary,
)
from .builder import (
    IntersectionIndex,
    PointSourceRecord,
    attach_point_sources,
    assign_hucs,
    build_hydrograph,
    compute_intersections,
    insert_waterbodies,
    match_external_lakes,
)
from .geo import (
    GeometryError,
    MultiPolygon,
    Point,
    Polygon,
    PolyLine,
    area,
    centroid,
    intersects,
    land_fraction,
    point_in_polygon,
    squared_distance,
)
from .graphcore import (
    Direction,
    HydroGraph,
    NodeKind,
    UnknownNodeError,
    build_graph,
    has_path,
    induced_subgraph,
    reachable_from,
)
from .ingest import (
    EngineConfig,
    FeatureKind,
    FeatureRecord,
    FlowEdge,
    ParseError,
    filter_waterbodies,
    load_config,
    parse_features,
    parse_flow_table,
    serialize_flow_table,
)
from .workspace import Workspace

__version__ = "0.1.0"
