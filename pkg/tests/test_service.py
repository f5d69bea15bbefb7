import json

import pytest
from fastapi.testclient import TestClient

from headprune import __version__
from headprune.service import app

from conftest import FIXTURE_BASELINE, FIXTURE_WEIGHTS


@pytest.fixture
def client():
    with TestClient(app, raise_server_exceptions=False) as test_client:
        yield test_client


def run_request(**overrides):
    config = {
        "strategy": "astar",
        "budget": 0.7,
        "oracle": {"additive": {"baseline": FIXTURE_BASELINE, "weights": FIXTURE_WEIGHTS}},
    }
    config.update(overrides)
    return {"config": config}


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok", "version": __version__}


def test_run_returns_summary_and_files(client):
    response = client.post("/runs", json=run_request())
    assert response.status_code == 200
    body = response.json()
    assert body["summary"]["pruned_heads"] == 3
    assert body["summary"]["budget_used"] == pytest.approx(0.6, abs=1e-9)
    assert body["summary"]["final_accuracy"] == pytest.approx(89.9, abs=1e-9)
    files = body["files"]
    for name in ("run_report.json", "trace.csv", "mask_matrix.csv",
                 "cost_matrix.csv", "run_meta.json"):
        assert name in files
    report = json.loads(files["run_report.json"])
    assert report["strategy"] == "astar"
    # The report never embeds the oracle spec; only its hash is kept, in the
    # manifest.
    assert "oracle" not in report
    assert "oracle_spec_hash" in json.loads(files["run_meta.json"])


def test_run_with_record_table(client):
    request = run_request()
    request["record_table"] = True
    response = client.post("/runs", json=request)
    assert response.status_code == 200
    table = json.loads(response.json()["files"]["oracle_table.json"])
    assert table["geometry"] == [2, 2]
    assert len(table["entries"]) >= 7


def test_config_error_lists_violations(client):
    response = client.post("/runs", json=run_request(budget=-2, workers=0))
    assert response.status_code == 400
    error = response.json()["error"]
    assert error["kind"] == "config"
    joined = " ".join(error["details"])
    assert "budget" in joined and "workers" in joined


def test_both_oracles_is_config_error(client):
    request = run_request()
    request["config"]["oracle"]["table"] = {"path": "whatever.json"}
    response = client.post("/runs", json=request)
    assert response.status_code == 400
    assert "exactly one oracle" in " ".join(response.json()["error"]["details"])


def test_oracle_failure_maps_to_502(client, tmp_path):
    table = tmp_path / "empty_table.json"
    table.write_text(json.dumps({"baseline": 90.0, "geometry": [2, 2], "entries": []}))
    response = client.post("/runs", json=run_request(oracle={"table": {"path": str(table)}}))
    assert response.status_code == 502
    error = response.json()["error"]
    assert error["kind"] == "oracle"
    # The partial-trace report rides along.
    assert "run_report.partial.json" in error.get("files", {})


def test_missing_table_file_is_config_error(client, tmp_path):
    response = client.post(
        "/runs",
        json=run_request(oracle={"table": {"path": str(tmp_path / "nope.json")}}),
    )
    assert response.status_code == 400
    assert response.json()["error"]["kind"] == "config"


def test_summarize_endpoint(client):
    report = json.loads(
        client.post("/runs", json=run_request()).json()["files"]["run_report.json"]
    )
    response = client.post("/summarize", json={"reports": [
        {"label": "fixture", "report": report},
    ]})
    assert response.status_code == 200
    lines = response.json()["csv"].splitlines()
    assert len(lines) == 2
    assert lines[1].startswith("fixture,astar,0.7,")


def test_incomplete_config_is_400(client):
    response = client.post("/runs", json={"config": {"strategy": "astar"}})
    assert response.status_code == 400
    assert "oracle" in " ".join(response.json()["error"]["details"])


def test_malformed_body_is_422(client):
    response = client.post("/runs", json={"record_table": True})
    assert response.status_code == 422
