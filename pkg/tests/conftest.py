from __future__ import annotations

import subprocess
import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
DEMO_INPUTS = REPO_ROOT / "fixtures" / "demo"


@pytest.fixture(scope="session")
def demo_workspace(tmp_path_factory) -> Path:
    """Workspace built from the checked-in demo inputs via the real CLI."""
    out = tmp_path_factory.mktemp("workspace") / "demo"
    cmd = [
        sys.executable,
        "-m",
        "hydrograph.cli",
        "build",
        "--flow", str(DEMO_INPUTS / "flow.csv"),
        "--rivers", str(DEMO_INPUTS / "rivers.geojson"),
        "--lakes", str(DEMO_INPUTS / "lakes.geojson"),
        "--watersheds", str(DEMO_INPUTS / "watersheds.geojson"),
        "--sources", str(DEMO_INPUTS / "cafos.csv"),
        "--config", str(DEMO_INPUTS / "config.toml"),
        "--ag", str(DEMO_INPUTS / "ag.geojson"),
        "--urban", str(DEMO_INPUTS / "urban.geojson"),
        "--out", str(out),
    ]
    result = subprocess.run(cmd, capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    return out


@pytest.fixture(scope="session")
def aggregated_demo_workspace(demo_workspace: Path) -> Path:
    """Demo workspace with the aggregation artifacts written alongside."""
    cmd = [
        sys.executable,
        "-m",
        "hydrograph.cli",
        "aggregate",
        "--in", str(demo_workspace / "edges.csv"),
        "--kinds", str(demo_workspace / "kinds.csv"),
        "--hucs", str(demo_workspace / "hucs.csv"),
        "--out", str(demo_workspace / "edges_agg.csv"),
        "--map", str(demo_workspace / "merges.csv"),
    ]
    result = subprocess.run(cmd, capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    return demo_workspace
