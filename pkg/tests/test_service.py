from __future__ import annotations

import hashlib
import json
import subprocess
import sys
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from hydrograph.api import create_app
from hydrograph.workspace import Workspace


@pytest.fixture(scope="module")
def workspace(demo_workspace: Path) -> Workspace:
    return Workspace.load(demo_workspace)


@pytest.fixture(scope="module")
def client(workspace: Workspace) -> TestClient:
    return TestClient(create_app(workspace))


def dir_digest(root: Path) -> str:
    h = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file():
            h.update(path.name.encode())
            h.update(path.read_bytes())
    return h.hexdigest()


class TestQueryEndpoints:
    def test_meta(self, client, workspace):
        doc = client.get("/meta").json()
        assert doc["snapshot_id"] == workspace.snapshot_id
        assert doc["nodes"] == 10 and doc["edges"] == 9

    def test_downstream_waterbodies(self, client):
        doc = client.get("/downstream/101").json()
        waterbodies = [n["comid"] for n in doc["nodes"] if n["kind"] == "Waterbody"]
        assert waterbodies == [102, 103]
        # the two split waterbodies are not chained to each other
        assert [102, 103] not in doc["edges"] and [103, 102] not in doc["edges"]

    def test_upstream(self, client):
        doc = client.get("/upstream/15").json()
        assert [n["comid"] for n in doc["nodes"]] == [12, 101, 102, 103, 1000000000000]

    def test_unknown_comid_404(self, client):
        assert client.get("/node/424242").status_code == 404
        assert client.get("/upstream/424242").status_code == 404
        assert client.get("/summary/424242").status_code == 404

    def test_node_detail(self, client):
        doc = client.get("/node/101").json()
        assert doc["kind"] == "Waterbody"
        assert doc["huc12"] == "070900020501"
        assert doc["centroid"] == [150.0, 800.0]

    def test_nodes_bbox(self, client):
        doc = client.get("/nodes", params={"bbox": "0,0,1000,1000"}).json()
        comids = [n["comid"] for n in doc["nodes"]]
        assert comids == [12, 15, 101, 102, 103, 1000000000000]
        assert doc["truncated"] is False

    def test_nodes_bad_bbox(self, client):
        assert client.get("/nodes", params={"bbox": "1,2,3"}).status_code == 422

    def test_nodes_cap_sets_truncation_flag(self, client, monkeypatch):
        import hydrograph.api as api_mod

        monkeypatch.setattr(api_mod, "NODE_LIST_CAP", 3)
        doc = client.get("/nodes").json()
        assert len(doc["nodes"]) == 3
        assert doc["truncated"] is True

    def test_summary(self, client):
        doc = client.get("/summary/15").json()
        assert doc["upstream_nodes"] == 5
        assert doc["upstream_waterbodies"] == 3
        assert doc["upstream_waterbody_area_km2"] == pytest.approx(0.02)
        assert doc["cafos"] == 1
        assert doc["ag_fraction"] == pytest.approx(0.5)
        assert doc["urban_fraction"] == pytest.approx(0.01)

    def test_layers_served(self, client):
        doc = json.loads(client.get("/layers/waterbodies").text)
        assert doc["type"] == "FeatureCollection"
        assert client.get("/layers/nonsense").status_code == 404

    def test_degree_workspace_refuses_summary(self, demo_workspace, tmp_path):
        import shutil

        degrees = tmp_path / "degrees_ws"
        shutil.copytree(demo_workspace, degrees)
        (degrees / "config.toml").write_text(
            'crs_note = "unprojected"\ncrs_units = "degrees"\n'
        )
        degree_client = TestClient(create_app(Workspace.load(degrees)))
        response = degree_client.get("/summary/15")
        assert response.status_code == 422
        assert "meter" in response.json()["detail"]


class TestCliParity:
    """HTTP bodies for /upstream and /downstream must equal CLI output."""

    @pytest.mark.parametrize("direction,node", [("upstream", 15), ("downstream", 101)])
    def test_byte_parity(self, client, demo_workspace, direction, node):
        http_body = client.get(f"/{direction}/{node}").text
        cli = subprocess.run(
            [
                sys.executable,
                "-m",
                "hydrograph.cli",
                direction,
                "--graph", str(demo_workspace / "edges.csv"),
                "--kinds", str(demo_workspace / "kinds.csv"),
                "--hucs", str(demo_workspace / "hucs.csv"),
                "--node", str(node),
            ],
            capture_output=True,
            text=True,
        )
        assert cli.returncode == 0, cli.stderr
        assert http_body == cli.stdout


class TestWhatIf:
    def test_divergent_basins(self, client):
        left = client.post("/whatif", json={"x": 950, "y": 900, "label": "L"}).json()
        right = client.post("/whatif", json={"x": 1050, "y": 900, "label": "R"}).json()
        assert left["source_huc12"] == "070900020501"
        assert right["source_huc12"] == "070900020502"
        assert left["downstream_waterbodies"] == [102, 103]
        assert right["downstream_waterbodies"] == [201, 202]
        assert not set(left["downstream_waterbodies"]) & set(
            right["downstream_waterbodies"]
        )

    def test_matches_cli_downstream_of_attached_node(self, client, demo_workspace):
        result = client.post("/whatif", json={"x": 1050, "y": 900, "label": "R"}).json()
        cli = subprocess.run(
            [
                sys.executable,
                "-m",
                "hydrograph.cli",
                "downstream",
                "--graph", str(demo_workspace / "edges.csv"),
                "--kinds", str(demo_workspace / "kinds.csv"),
                "--node", str(result["attached_node"]),
            ],
            capture_output=True,
            text=True,
        )
        doc = json.loads(cli.stdout)
        cli_waterbodies = [
            n["comid"] for n in doc["nodes"] if n["kind"] == "Waterbody"
        ]
        assert result["downstream_waterbodies"] == cli_waterbodies

    def test_stateless_repeats(self, client):
        a = client.post("/whatif", json={"x": 950, "y": 900, "label": "L"}).json()
        b = client.post("/whatif", json={"x": 950, "y": 900, "label": "L"}).json()
        assert a == b

    def test_outside_watersheds_422(self, client):
        response = client.post("/whatif", json={"x": 9999, "y": 9999, "label": "x"})
        assert response.status_code == 422
        assert response.json()["detail"] == "no HUC12 contains this point"

    def test_subgraph_features(self, client):
        doc = client.post("/whatif", json={"x": 950, "y": 900, "label": "L"}).json()
        roles = {f["properties"]["role"] for f in doc["subgraph"]["features"]}
        assert {"source", "attached", "downstream"} <= roles
        kinds = {
            f["properties"].get("kind")
            for f in doc["subgraph"]["features"]
            if f["properties"]["role"] == "source"
        }
        assert kinds == {"PointSource"}


class TestSnapshotDiscipline:
    def test_snapshot_id_in_bodies(self, client, workspace):
        for path in ("/meta", "/node/101", "/summary/101"):
            assert client.get(path).json()["snapshot_id"] == workspace.snapshot_id
        whatif = client.post("/whatif", json={"x": 950, "y": 900, "label": "s"})
        assert whatif.json()["snapshot_id"] == workspace.snapshot_id

    def test_snapshot_id_in_direction_headers(self, client, workspace):
        for path in ("/upstream/15", "/downstream/101"):
            response = client.get(path)
            assert response.headers["x-snapshot-id"] == workspace.snapshot_id
            assert "snapshot_id" not in response.json()  # body stays CLI-identical

    def test_reload_swaps_atomically(self, demo_workspace):
        ws = Workspace.load(demo_workspace)
        app = create_app(ws)
        client = TestClient(app)
        first = client.get("/meta").json()["snapshot_id"]
        app.state.swap_workspace(Workspace.load(demo_workspace))
        second = client.get("/meta").json()["snapshot_id"]
        assert first == second  # same bytes on disk, same snapshot id


class TestReadOnly:
    def test_queries_touch_no_files(self, demo_workspace):
        ws = Workspace.load(demo_workspace)
        client = TestClient(create_app(ws))
        before = dir_digest(demo_workspace)
        client.get("/meta")
        client.get("/downstream/101")
        client.get("/summary/15")
        client.post("/whatif", json={"x": 950, "y": 900, "label": "probe"})
        after = dir_digest(demo_workspace)
        assert before == after
