import pytest
from fastapi.testclient import TestClient

from app.database import get_db
from app.main import create_application

PREFIX = "/api/v1"


@pytest.fixture
def client(db_session):
    app = create_application()

    def override_get_db():
        yield db_session

    app.dependency_overrides[get_db] = override_get_db
    return TestClient(app)


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["code"] == 0
    assert "X-Process-Time" in response.headers


def test_lens_synthesis(client):
    body = client.post(f"{PREFIX}/synthesis/lens", json={}).json()
    assert body["code"] == 0
    ring = body["data"]["ring_table"]
    assert ring[0]["cell"] == "(0,10)"
    assert ring[0]["phase_deg"] == pytest.approx(243.44)
    assert ring[-1]["magnitude"] == pytest.approx(0.65)
    assert isinstance(body["data"]["run_id"], str)


def test_lens_with_bad_library_entry(client):
    response = client.post(f"{PREFIX}/synthesis/lens", json={"library": [{"phase_deg": 10.0}]})
    assert response.status_code == 400
    assert response.json()["code"] == 400


def test_lens_rejects_even_cell_count(client):
    response = client.post(f"{PREFIX}/synthesis/lens", json={"cells_per_side": 20})
    assert response.status_code == 422
    assert response.json()["code"] == 422


def test_focal_scan(client):
    payload = {
        "lens": {"mask_mode": "ideal", "samples_per_cell": 2},
        "scan": {"z_start_mm": 15.0, "z_stop_mm": 25.0, "steps": 11},
    }
    data = client.post(f"{PREFIX}/propagation/focal-scan", json=payload).json()["data"]
    assert len(data["z_mm"]) == 11
    assert 18.0 <= data["peak_z_mm"] <= 22.0


def test_patch_sweep(client):
    data = client.post(f"{PREFIX}/scatter/sweep", json={}).json()["data"]
    assert "tag" not in data
    assert len(data["patch"]["sweep"]["angles_deg"]) == 17
    assert data["patch"]["stats"]["count"] == 17


def test_sweep_with_lens_larger_than_board(client):
    payload = {"tag": {"mode": "tag", "board_extent_mm": 30.0}}
    response = client.post(f"{PREFIX}/scatter/sweep", json=payload)
    assert response.status_code == 422


def test_bragg(client):
    data = client.post(f"{PREFIX}/scatter/bragg", json={"orders": [1, -1, 2]}).json()["data"]
    assert data["angles_deg"][0] == pytest.approx(50.3, abs=0.2)
    assert data["omitted"] == 1


def test_link_report(client):
    data = client.post(f"{PREFIX}/link/report", json={}).json()["data"]
    rows = {row["quantity"]: row["value"] for row in data["rows"]}
    assert rows["detection_range"] == pytest.approx(74.4, abs=0.1)
    assert rows["range_factor"] == pytest.approx(3.24, abs=0.01)
    assert len(data["snr_curve"]) == 5


def test_link_report_validation(client):
    response = client.post(f"{PREFIX}/link/report", json={"anchor_range_m": -1})
    assert response.status_code == 422
    assert response.json()["code"] == 422


def test_calibrate(client):
    data = client.post(f"{PREFIX}/link/calibrate", json={"target_power_db": -40.0}).json()["data"]
    assert data["sphere_rcs_dbsm"] == pytest.approx(-26.20, abs=0.05)
    assert data["target_rcs_dbsm"] == pytest.approx(-6.20, abs=0.05)
    assert data["factor"]["reference_range_m"] == 5.0


def test_calibrate_corrects_target_range(client):
    data = client.post(f"{PREFIX}/link/calibrate", json={"target_power_db": -40.0, "target_range_m": 10.0}).json()["data"]
    assert data["target_rcs_dbsm"] == pytest.approx(-6.20 + 12.04, abs=0.06)


def test_fmcw_derived(client):
    data = client.post(f"{PREFIX}/fmcw/derived", json={}).json()["data"]
    assert data["bandwidth_ghz"] == pytest.approx(4.19, abs=0.01)
    assert data["max_range_m"] == pytest.approx(73.3, abs=0.5)


def test_fmcw_derived_rejects_long_sampling_window(client):
    response = client.post(f"{PREFIX}/fmcw/derived", json={"samples_per_chirp": 8192})
    assert response.status_code == 422


def test_fmcw_scenario(client):
    data = client.post(f"{PREFIX}/fmcw/scenario", json={}).json()["data"]
    assert data["peak"]["range_m"] == pytest.approx(20.0, abs=0.04)
    assert data["peak"]["azimuth_deg"] == pytest.approx(10.0, abs=0.7)


def test_fmcw_target_out_of_range(client):
    response = client.post(f"{PREFIX}/fmcw/scenario", json={"targets": [{"range_m": 120.0, "amplitude": 1.0}]})
    assert response.status_code == 400
    assert "#0" in response.json()["msg"]


def test_runs_are_recorded(client):
    client.post(f"{PREFIX}/link/report", json={})
    created = client.post(f"{PREFIX}/link/calibrate", json={}).json()["data"]["run_id"]
    listing = client.get(f"{PREFIX}/runs").json()["data"]
    assert listing["total"] == 2
    filtered = client.get(f"{PREFIX}/runs", params={"command": "link"}).json()["data"]
    assert [item["command"] for item in filtered["items"]] == ["link"]
    detail = client.get(f"{PREFIX}/runs/{created}").json()["data"]
    assert detail["command"] == "calibrate"
    assert detail["status"] == "succeeded"
    assert detail["summary"]["sphere_rcs_dbsm"] == pytest.approx(-26.20, abs=0.05)
    assert len(detail["config_hash"]) == 64


def test_unknown_run(client):
    response = client.get(f"{PREFIX}/runs/12345")
    assert response.status_code == 404
    assert response.json()["code"] == 404
