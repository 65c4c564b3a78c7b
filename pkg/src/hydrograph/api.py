"""Read-only HTTP facade over a loaded workspace.

Query endpoints mirror the CLI: /upstream and /downstream bodies are
byte-identical to the CLI's canonical JSON for the same snapshot (the
snapshot id travels in the X-Snapshot-Id header there; other endpoints
carry it in the body). POST /whatif overlays an ephemeral pollutant
source and reports what lies downstream; nothing is ever persisted, so
repeated exploration is side-effect free.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import geo
from .analysis import UnitsError, upstream_summary
from .builder import huc_for_point, nearest_node
from .graphcore import Direction, HydroGraph, NodeKind, reachable_from
from .ingest import geometry_to_geojson
from .workspace import Workspace

NODE_LIST_CAP = 20_000


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def direction_payload(g: HydroGraph, target: int, direction: Direction) -> dict:
    """The shared CLI/HTTP answer for an upstream or downstream query."""
    reach, sub = reachable_from(g, target, direction)
    return {
        "target": target,
        "direction": direction.value,
        "nodes": [
            {"comid": c, "kind": g.kind(c).value, "huc12": g.huc(c)}
            for c in sorted(reach)
        ],
        "edges": [[f, t] for f, t in sub.edges()],
    }


def whatif_payload(ws: Workspace, x: float, y: float, label: str) -> dict:
    """Attach an ephemeral source at (x, y) and trace its downstream reach.

    The reported downstream sets describe the attached node's reach, so
    they match the CLI `downstream` output for that node exactly; the
    attachment point itself is called out separately.
    """
    point = geo.Point(x, y)
    huc = huc_for_point(point, ws.watersheds)
    if huc is None:
        raise HTTPException(422, "no HUC12 contains this point")
    attached = nearest_node(point, huc, ws.graph, ws.centroids)
    if attached is None:
        raise HTTPException(422, f"no graph nodes in HUC12 {huc}")
    reach, sub = reachable_from(ws.graph, attached, Direction.DOWNSTREAM)
    members = sorted(reach | {attached})
    features = []
    for c in members:
        geom = ws.geometries.get(c)
        if geom is None:
            continue
        features.append(
            {
                "type": "Feature",
                "properties": {
                    "comid": c,
                    "kind": ws.graph.kind(c).value,
                    "huc12": ws.graph.huc(c),
                    "role": "attached" if c == attached else "downstream",
                },
                "geometry": geometry_to_geojson(geom),
            }
        )
    features.append(
        {
            "type": "Feature",
            "properties": {"kind": "PointSource", "label": label, "role": "source"},
            "geometry": {"type": "Point", "coordinates": [x, y]},
        }
    )
    return {
        "snapshot_id": ws.snapshot_id,
        "source_huc12": huc,
        "attached_node": attached,
        "downstream_nodes": sorted(reach),
        "downstream_waterbodies": sorted(
            c for c in reach if ws.graph.kind(c) is NodeKind.WATERBODY
        ),
        "edges": [[f, t] for f, t in sub.edges()],
        "subgraph": {"type": "FeatureCollection", "features": features},
    }


class WhatIfRequest(BaseModel):
    x: float
    y: float
    label: str = "what-if source"


def create_app(workspace: Workspace) -> FastAPI:
    app = FastAPI(title="hydrograph service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    container = {"ws": workspace}
    app.state.container = container

    def ws() -> Workspace:
        return container["ws"]

    def swap(new_ws: Workspace) -> None:
        # single reference assignment: readers see old or new, never a mix
        container["ws"] = new_ws

    app.state.swap_workspace = swap

    def require_node(comid: int) -> HydroGraph:
        g = ws().graph
        if not g.has_node(comid):
            raise HTTPException(404, f"unknown comid {comid}")
        return g

    @app.get("/meta")
    def meta():
        w = ws()
        boxes = [geo.bbox(g) for g in w.geometries.values()]
        extent = None
        if boxes:
            extent = [
                min(b[0] for b in boxes),
                min(b[1] for b in boxes),
                max(b[2] for b in boxes),
                max(b[3] for b in boxes),
            ]
        return {
            "snapshot_id": w.snapshot_id,
            "nodes": w.graph.node_count,
            "edges": w.graph.edge_count,
            "aggregated": w.aggregated is not None,
            "extent": extent,
        }

    @app.get("/nodes")
    def nodes(bbox: str | None = None):
        w = ws()
        window = None
        if bbox is not None:
            try:
                parts = [float(v) for v in bbox.split(",")]
                if len(parts) != 4:
                    raise ValueError
            except ValueError:
                raise HTTPException(422, "bbox must be minx,miny,maxx,maxy") from None
            window = (parts[0], parts[1], parts[2], parts[3])
        listed = []
        truncated = False
        for c in w.graph.nodes():
            p = w.centroids.get(c)
            if window is not None:
                if p is None or not geo._box_contains(window, p):
                    continue
            if len(listed) >= NODE_LIST_CAP:
                truncated = True
                break
            listed.append(
                {
                    "comid": c,
                    "kind": w.graph.kind(c).value,
                    "huc12": w.graph.huc(c),
                    "x": p.x if p else None,
                    "y": p.y if p else None,
                }
            )
        return {
            "snapshot_id": w.snapshot_id,
            "nodes": listed,
            "truncated": truncated,
        }

    @app.get("/node/{comid}")
    def node(comid: int):
        w = ws()
        g = require_node(comid)
        p = w.centroids.get(comid)
        return {
            "snapshot_id": w.snapshot_id,
            "comid": comid,
            "kind": g.kind(comid).value,
            "huc12": g.huc(comid),
            "centroid": [p.x, p.y] if p else None,
            "in_degree": len(g.predecessors(comid)),
            "out_degree": len(g.successors(comid)),
        }

    def _direction_response(comid: int, direction: Direction) -> Response:
        g = require_node(comid)
        payload = direction_payload(g, comid, direction)
        return Response(
            content=canonical_json(payload),
            media_type="application/json",
            headers={"X-Snapshot-Id": ws().snapshot_id},
        )

    @app.get("/upstream/{comid}")
    def upstream(comid: int):
        return _direction_response(comid, Direction.UPSTREAM)

    @app.get("/downstream/{comid}")
    def downstream(comid: int):
        return _direction_response(comid, Direction.DOWNSTREAM)

    @app.get("/summary/{comid}")
    def summary(comid: int):
        w = ws()
        require_node(comid)
        cached = w.summaries.get(comid)
        if cached is None:
            try:
                result = upstream_summary(
                    w.graph,
                    comid,
                    w.geometries,
                    w.watersheds,
                    w.ag_cover,
                    w.urban_cover,
                    grid_step=w.config.grid_step,
                    crs_units=w.config.crs_units,
                )
            except UnitsError as exc:
                raise HTTPException(422, str(exc)) from None
            cached = result.to_dict()
            w.summaries[comid] = cached
        return {"snapshot_id": w.snapshot_id, **cached}

    @app.get("/layers/{name}")
    def layer(name: str):
        w = ws()
        path = w.root / f"{name}.geojson"
        if name not in (
            "waterbodies",
            "rivers",
            "watersheds",
            "point_sources",
            "ag",
            "urban",
        ) or not path.exists():
            raise HTTPException(404, f"no layer {name}")
        return Response(
            content=path.read_text(encoding="utf-8"),
            media_type="application/geo+json",
            headers={"X-Snapshot-Id": w.snapshot_id},
        )

    @app.post("/whatif")
    def whatif(req: WhatIfRequest):
        return whatif_payload(ws(), req.x, req.y, req.label)

    return app
