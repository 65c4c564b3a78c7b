"""Command-line entry point.

Subcommands map one-to-one onto library operations: build, aggregate,
verify, upstream, downstream, attach-sources, classify, metrics, tsi,
serve. Exit codes: 0 success, 1 validation problem (bad flags, bad data,
failed verification), 2 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import analysis, builder, geo, workspace as ws_mod
from .aggregate import (
    AggregationError,
    MergeContext,
    aggregate,
    verify_connectivity,
)
from .api import canonical_json, create_app, direction_payload
from .graphcore import Direction, build_graph
from .ingest import (
    FeatureKind,
    ParseError,
    load_config,
    parse_features,
    parse_flow_table,
    serialize_flow_table,
)
from .workspace import Workspace


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract here is usage text + exit 1
    def error(self, message):
        raise UsageError(message)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _build_parser() -> _Parser:
    parser = _Parser(prog="hydrograph")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="build a workspace from raw inputs")
    p.add_argument("--flow", required=True, help="FROMCOMID,TOCOMID CSV")
    p.add_argument("--rivers", required=True, help="river GeoJSON")
    p.add_argument("--lakes", required=True, help="waterbody GeoJSON")
    p.add_argument("--watersheds", required=True, help="HUC12 watershed GeoJSON")
    p.add_argument("--sources", help="point-source CSV (SOURCE_ID,LABEL,X,Y)")
    p.add_argument("--config", help="TOML config")
    p.add_argument("--ag", help="agricultural land-cover GeoJSON")
    p.add_argument("--urban", help="urban land-cover GeoJSON")
    p.add_argument("--out", required=True, help="workspace directory to write")

    p = sub.add_parser("aggregate", help="merge river nodes, preserving waterbody connectivity")
    p.add_argument("--in", dest="edges_in", required=True)
    p.add_argument("--kinds", required=True)
    p.add_argument("--hucs", required=True)
    p.add_argument("--out", required=True, help="aggregated edge CSV")
    p.add_argument("--map", dest="merge_map", required=True, help="MERGED_COMID,SURVIVOR_COMID CSV")

    p = sub.add_parser("verify", help="check waterbody connectivity is unchanged")
    p.add_argument("--original", required=True)
    p.add_argument("--aggregated", required=True)
    p.add_argument("--kinds", required=True)
    p.add_argument("--map", dest="merge_map")
    p.add_argument("--out", help="JSON report path")

    for name in ("upstream", "downstream"):
        p = sub.add_parser(name, help=f"{name} nodes and induced edges for a node")
        p.add_argument("--graph", help="edge CSV (or use --workspace)")
        p.add_argument("--kinds")
        p.add_argument("--hucs")
        p.add_argument("--workspace", help="workspace dir; enables --geojson")
        p.add_argument("--node", type=int, required=True)
        p.add_argument("--out", help="write JSON here instead of stdout")
        p.add_argument("--edges-csv", dest="edges_csv", help="write the induced edge list CSV")
        p.add_argument("--geojson", help="write member geometries (workspace mode)")

    p = sub.add_parser("attach-sources", help="attach point sources to a workspace")
    p.add_argument("--workspace", required=True)
    p.add_argument("--sources", required=True)
    p.add_argument("--out", required=True, help="directory for the augmented workspace")

    p = sub.add_parser("classify", help="label sampled lakes Clean/Polluted")
    p.add_argument("--samples", required=True, help="COMID,PARAM,VALUE CSV")
    p.add_argument("--min-count", type=int, default=50)
    p.add_argument("--clean-tp-max", type=float, default=15.0)
    p.add_argument("--clean-chla-max", type=float, default=5.0)
    p.add_argument("--polluted-tp-min", type=float, default=60.0)
    p.add_argument("--polluted-chla-min", type=float, default=15.0)
    p.add_argument("--out", help="JSON output path")

    p = sub.add_parser("metrics", help="cohort metrics table over a workspace")
    p.add_argument("--workspace", required=True)
    p.add_argument("--samples", required=True)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--json", dest="json_out", help="JSON output path")

    p = sub.add_parser("tsi", help="trophic state index for a concentration")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--tp", type=float, help="total phosphorus, mg/m^3")
    group.add_argument("--chla", type=float, help="chlorophyll-a, mg/m^3")

    p = sub.add_parser("serve", help="run the HTTP query service")
    p.add_argument("--workspace", help="workspace dir (or $HYDROGRAPH_WORKSPACE)")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    return parser


def _cmd_build(args) -> int:
    config = load_config(Path(args.config).read_bytes()) if args.config else None
    edges = parse_flow_table(_read(args.flow))
    rivers = parse_features(_read(args.rivers), FeatureKind.RIVER_SEGMENT)
    lakes = parse_features(_read(args.lakes), FeatureKind.WATERBODY)
    sheds = parse_features(_read(args.watersheds), FeatureKind.WATERSHED)
    sources = (
        builder.parse_point_sources(_read(args.sources)) if args.sources else None
    )
    result = builder.build_hydrograph(
        edges,
        rivers,
        lakes,
        sheds,
        exclude=config.exclude_comids if config else [],
        sources=sources,
    )
    out = ws_mod.save_workspace(
        args.out,
        result.edges,
        result.kinds,
        result.hucs,
        waterbodies=result.waterbodies,
        rivers=result.rivers,
        watersheds=result.watersheds,
        sources=result.sources,
        config_text=_read(args.config) if args.config else None,
    )
    for name, src in ((ws_mod.AG_FILE, args.ag), (ws_mod.URBAN_FILE, args.urban)):
        if src:
            cover = parse_features(_read(src), FeatureKind.LAND_COVER)
            (out / name).write_text(
                ws_mod.features_to_geojson(cover), encoding="utf-8"
            )
    (out / "report.json").write_text(result.report.to_json(), encoding="utf-8")
    (out / "report.txt").write_text(result.report.to_text(), encoding="utf-8")
    print(result.report.to_text(), end="")
    print(f"workspace written to {out}")
    return 0


def _cmd_aggregate(args) -> int:
    edges = parse_flow_table(_read(args.edges_in))
    kinds = ws_mod.parse_kinds(_read(args.kinds))
    hucs = ws_mod.parse_hucs(_read(args.hucs))
    ctx = MergeContext.from_graph_inputs(edges, kinds, hucs)
    before = len(ctx.surviving_nodes())
    result = aggregate(ctx)
    after = len(result.surviving_nodes())
    Path(args.out).write_text(
        serialize_flow_table(result.edges), encoding="utf-8"
    )
    Path(args.merge_map).write_text(
        ws_mod.serialize_merges(result.merged_into), encoding="utf-8"
    )
    print(f"aggregated {before} nodes to {after} in {result.sweeps} sweeps")
    return 0


def _cmd_verify(args) -> int:
    original_edges = parse_flow_table(_read(args.original))
    aggregated_edges = parse_flow_table(_read(args.aggregated))
    kinds = ws_mod.parse_kinds(_read(args.kinds))
    merge_map = ws_mod.parse_merges(_read(args.merge_map)) if args.merge_map else {}
    original = build_graph(original_edges, kinds)
    survivors = [c for c in original.nodes() if c not in merge_map]
    aggregated = build_graph(aggregated_edges, kinds, extra_nodes=survivors)
    report = verify_connectivity(original, aggregated, merge_map)
    doc = report.to_dict()
    if args.out:
        Path(args.out).write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    print(
        f"checked {report.checked_pairs} waterbody pairs, "
        f"{len(report.mismatches)} mismatches"
    )
    return 0 if not report.mismatches else 1


def _cmd_direction(args, direction: Direction) -> int:
    ws = None
    if args.workspace:
        ws = Workspace.load(args.workspace)
        g = ws.graph
    elif args.graph:
        edges = parse_flow_table(_read(args.graph))
        kinds = ws_mod.parse_kinds(_read(args.kinds)) if args.kinds else {}
        hucs = ws_mod.parse_hucs(_read(args.hucs)) if args.hucs else {}
        g = build_graph(edges, kinds, hucs)
    else:
        raise UsageError("need --graph or --workspace")
    payload = direction_payload(g, args.node, direction)
    text = canonical_json(payload)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.edges_csv:
        from .graphcore import reachable_from

        _, subgraph = reachable_from(g, args.node, direction)
        Path(args.edges_csv).write_text(
            serialize_flow_table(subgraph.edges()), encoding="utf-8"
        )
    if args.geojson:
        if ws is None:
            raise UsageError("--geojson needs --workspace")
        members = [n["comid"] for n in payload["nodes"]] + [args.node]
        Path(args.geojson).write_text(
            ws_mod.subgraph_geojson(ws, members), encoding="utf-8"
        )
    return 0


def _cmd_attach_sources(args) -> int:
    ws = Workspace.load(args.workspace)
    raw = builder.parse_point_sources(_read(args.sources))
    tagged = builder.tag_sources_with_hucs(raw, ws.watersheds)
    graph, skipped = builder.attach_point_sources(ws.graph, tagged, ws.centroids)
    skipped_ids = {s.source_id for s in skipped}
    attached = [s for s in tagged if s.source_id not in skipped_ids]
    existing_file = Path(args.workspace) / ws_mod.SOURCES_FILE
    if existing_file.exists():
        attached = (
            ws_mod.parse_sources_geojson(existing_file.read_text(encoding="utf-8"))
            + attached
        )
    kinds = {c: graph.kind(c) for c in graph.nodes()}
    hucs = {c: graph.huc(c) for c in graph.nodes() if graph.huc(c) is not None}
    out = ws_mod.save_workspace(
        args.out, list(graph.edges()), kinds, hucs, sources=attached
    )
    for name in (
        ws_mod.WATERBODIES_FILE,
        ws_mod.RIVERS_FILE,
        ws_mod.WATERSHEDS_FILE,
        ws_mod.AG_FILE,
        ws_mod.URBAN_FILE,
        ws_mod.CONFIG_FILE,
    ):
        src = Path(args.workspace) / name
        if src.exists():
            (out / name).write_text(src.read_text(encoding="utf-8"), encoding="utf-8")
    print(f"attached {len(attached)} sources, skipped {len(skipped)}")
    return 0


def _cmd_classify(args) -> int:
    samples = analysis.parse_lake_samples(_read(args.samples))
    cfg = analysis.ClassifyConfig(
        min_count=args.min_count,
        clean_tp_max=args.clean_tp_max,
        clean_chla_max=args.clean_chla_max,
        polluted_tp_min=args.polluted_tp_min,
        polluted_chla_min=args.polluted_chla_min,
    )
    labels = analysis.classify_lakes(samples, cfg)
    doc = {str(comid): label.value for comid, label in sorted(labels.items())}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_metrics(args) -> int:
    ws = Workspace.load(args.workspace)
    samples = analysis.parse_lake_samples(_read(args.samples))
    labels = analysis.classify_lakes(samples)
    cohort_lakes = {
        c: label
        for c, label in labels.items()
        if label in (analysis.LakeClass.CLEAN, analysis.LakeClass.POLLUTED)
    }
    summaries = {}
    lake_hucs: dict[int, str] = {}
    for comid in cohort_lakes:
        if ws.graph.has_node(comid):
            summaries[comid] = analysis.upstream_summary(
                ws.graph,
                comid,
                ws.geometries,
                ws.watersheds,
                ws.ag_cover,
                ws.urban_cover,
                grid_step=ws.config.grid_step,
                crs_units=ws.config.crs_units,
            )
            huc = ws.graph.huc(comid)
            if huc:
                lake_hucs[comid] = huc
        elif comid in ws.geometries:
            huc = builder.huc_for_point(
                geo.centroid(ws.geometries[comid]), ws.watersheds
            )
            if huc:
                lake_hucs[comid] = huc
    rows = analysis.metrics_table(ws.graph, cohort_lakes, summaries, lake_hucs)
    csv_text = analysis.metrics_to_csv(rows)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    else:
        sys.stdout.write(csv_text)
    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps([r.to_dict() for r in rows], indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    return 0


def _cmd_tsi(args) -> int:
    value = (
        analysis.tsi_tp(args.tp) if args.tp is not None else analysis.tsi_chla(args.chla)
    )
    print(f"{value:.2f}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    root = args.workspace or os.environ.get("HYDROGRAPH_WORKSPACE")
    if not root:
        raise UsageError("serve needs --workspace or $HYDROGRAPH_WORKSPACE")
    app = create_app(Workspace.load(root))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


_COMMANDS = {
    "build": _cmd_build,
    "aggregate": _cmd_aggregate,
    "verify": _cmd_verify,
    "upstream": lambda a: _cmd_direction(a, Direction.UPSTREAM),
    "downstream": lambda a: _cmd_direction(a, Direction.DOWNSTREAM),
    "attach-sources": _cmd_attach_sources,
    "classify": _cmd_classify,
    "metrics": _cmd_metrics,
    "tsi": _cmd_tsi,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, AggregationError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
