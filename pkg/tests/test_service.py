"""HTTP API behaviour and CLI/API equivalence."""

from __future__ import annotations

import threading

import pytest
from fastapi.testclient import TestClient

from conftest import GOLDEN_DIR
from refspect.exports import clusters_csv, spectrum_csv
from refspect.ingest import CitingRecord
from refspect.service import create_app
from refspect.session import AnalysisSession, Filters, load_session
from refspect.spectrum import EraThresholdRule

ARR_PHILOS = "ARRHENIUS S, 1896, PHILOS MAG, V41, P237"
ARR_LONDON = "ARRHENIUS S, 1896, LONDON EDINBURGH DUBL, V41, P237"

GOLDEN_FILTERS = Filters(
    cutoff_year=1971,
    era_rules=(EraThresholdRule((1000, 1900), 10), EraThresholdRule((1901, 1970), 100)),
    year_range=(1686, 1970),
)


@pytest.fixture()
def golden_client(golden_records, tmp_path):
    session = AnalysisSession(golden_records, filters=GOLDEN_FILTERS)
    app = create_app(session, session_path=str(tmp_path / "session.json"))
    return TestClient(app), session


@pytest.fixture()
def arrhenius_client():
    records = [
        CitingRecord(f"P{i:04d}", 1990, "Article", (ARR_PHILOS,)) for i in range(279)
    ] + [
        CitingRecord(f"L{i:04d}", 1991, "Article", (ARR_LONDON,)) for i in range(32)
    ]
    session = AnalysisSession(records, filters=Filters(year_range=(1890, 1900)))
    return TestClient(create_app(session)), session


class TestReads:
    def test_session_endpoint_shape(self, golden_client):
        client, session = golden_client
        body = client.get("/session").json()
        assert body["counter"] == 0
        assert body["session_id"] == session.session_id
        assert body["fingerprint"] == session.fingerprint
        assert body["num_records"] == 200
        assert body["ledger"] == []
        assert body["filters"]["cutoff_year"] == 1971

    def test_spectrum_rows_equal_csv_export(self, golden_client):
        client, _ = golden_client
        body = client.get("/spectrum", params={"from": 1686, "to": 1970}).json()
        golden = (GOLDEN_DIR / "spectrum.csv").read_text().splitlines()[1:]
        assert len(body["points"]) == len(golden)
        for point, line in zip(body["points"], golden):
            rpy, ncr, median5, dev = (int(x) for x in line.split(","))
            assert (point["rpy"], point["ncr"], point["median5"], point["dev"]) == (
                rpy, ncr, median5, dev,
            )

    def test_half_open_range_rejected(self, golden_client):
        client, _ = golden_client
        response = client.get("/spectrum", params={"from": 1700})
        assert response.status_code == 400
        assert response.json()["code"] == "invalid_range"

    def test_year_references(self, golden_client):
        client, _ = golden_client
        body = client.get("/years/1896/references", params={"k": 5}).json()
        assert [r["ncr"] for r in body["references"]] == [15]
        assert body["references"][0]["author"] == "ARRHENIUS S"

    def test_peaks(self, golden_client):
        client, _ = golden_client
        body = client.get("/peaks", params={"min_deviation": 1}).json()
        years = sorted(p["rpy"] for p in body["peaks"])
        assert years == [1686, 1735, 1824, 1859, 1861, 1896, 1945, 1964]
        strongest = body["peaks"][0]
        assert strongest["rpy"] == 1964
        assert strongest["top_clusters"][0]["ncr"] == 120

    def test_export_endpoints_equal_library_exports(self, golden_client):
        client, session = golden_client
        assert client.get("/export/spectrum.csv").text == spectrum_csv(session.spectrum())
        assert client.get("/export/clusters.csv").text == clusters_csv(
            session.effective_clusters(), session.cluster_ncr()
        )


class TestMutations:
    def test_merge_then_year_shows_combined_ncr(self, arrhenius_client):
        client, session = arrhenius_client
        refs = client.get("/years/1896/references").json()["references"]
        assert sorted(r["ncr"] for r in refs) == [32, 279]
        ids = [r["cluster_id"] for r in refs]

        response = client.post("/clusters/merge", json={"ids": ids, "note": "variants"})
        assert response.status_code == 200
        assert response.json()["counter"] == 1

        refs = client.get("/years/1896/references").json()["references"]
        assert [r["ncr"] for r in refs] == [311]
        assert [e.op for e in session.ledger] == ["merge"]

    def test_split_and_year_correction(self, arrhenius_client):
        client, _ = arrhenius_client
        refs = client.get("/years/1896/references").json()["references"]
        ids = [r["cluster_id"] for r in refs]
        merged = client.post("/clusters/merge", json={"ids": ids}).json()["cluster_id"]

        response = client.post(
            f"/clusters/{merged}/split",
            json={"partition": [[ARR_PHILOS], [ARR_LONDON]]},
        )
        assert response.status_code == 200
        assert sorted(response.json()["cluster_ids"]) == sorted(ids)

        response = client.post(f"/clusters/{ids[0]}/year", json={"rpy": 1895})
        assert response.status_code == 200
        refs = client.get("/years/1895/references").json()["references"]
        assert len(refs) == 1

    def test_unknown_cluster_is_404_with_error_shape(self, arrhenius_client):
        client, _ = arrhenius_client
        response = client.post("/clusters/merge", json={"ids": ["cnope", "calsonope"]})
        assert response.status_code == 404
        body = response.json()
        assert set(body) == {"code", "message", "detail"}
        assert body["code"] == "unknown_cluster"

    def test_invalid_partition_is_400(self, arrhenius_client):
        client, _ = arrhenius_client
        refs = client.get("/years/1896/references").json()["references"]
        response = client.post(
            f"/clusters/{refs[0]['cluster_id']}/split", json={"partition": [[]]}
        )
        assert response.status_code == 400
        assert response.json()["code"] == "invalid_partition"

    def test_body_validation_uses_error_shape(self, arrhenius_client):
        client, _ = arrhenius_client
        response = client.post("/clusters/merge", json={"ids": ["only-one"]})
        assert response.status_code == 400
        body = response.json()
        assert set(body) == {"code", "message", "detail"}
        assert body["code"] == "validation_error"

    def test_stale_counter_conflict(self, arrhenius_client):
        client, _ = arrhenius_client
        refs = client.get("/years/1896/references").json()["references"]
        ids = [r["cluster_id"] for r in refs]
        assert client.post(
            "/clusters/merge", json={"ids": ids, "counter": 0}
        ).status_code == 200
        response = client.post(f"/clusters/{ids[0]}/year", json={"rpy": 1894, "counter": 0})
        assert response.status_code == 409
        assert response.json()["code"] == "stale_counter"

    def test_concurrent_conflicting_merges_one_wins(self, golden_records):
        session = AnalysisSession(golden_records, filters=GOLDEN_FILTERS)
        client = TestClient(create_app(session))
        refs = client.get("/years/1896/references").json()["references"]
        ids = [r["cluster_id"] for r in refs]
        assert len(ids) == 1  # thresholds keep one 1896 cluster; use 1945/1964 pair too
        a = client.get("/years/1945/references").json()["references"][0]["cluster_id"]
        b = client.get("/years/1964/references").json()["references"][0]["cluster_id"]

        statuses = []
        barrier = threading.Barrier(2)

        def attempt(pair):
            barrier.wait()
            response = client.post("/clusters/merge", json={"ids": pair, "counter": 0})
            statuses.append(response.status_code)

        threads = [
            threading.Thread(target=attempt, args=([ids[0], a],)),
            threading.Thread(target=attempt, args=([ids[0], b],)),
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(statuses) == [200, 409]
        assert len(session.ledger) == 1

    def test_bad_token_rejected(self, arrhenius_client):
        client, _ = arrhenius_client
        refs = client.get("/years/1896/references").json()["references"]
        ids = [r["cluster_id"] for r in refs]
        response = client.post("/clusters/merge", json={"ids": ids, "token": "wrong"})
        assert response.status_code == 403
        good = client.get("/session").json()["token"]
        response = client.post("/clusters/merge", json={"ids": ids, "token": good})
        assert response.status_code == 200


class TestMarkers:
    def test_marker_roundtrip_and_co_spectrum(self, golden_records, tmp_path):
        session = AnalysisSession(golden_records, filters=Filters(cutoff_year=1971))
        client = TestClient(create_app(session))
        marker = session.table().cluster_for_raw(ARR_PHILOS).cluster_id

        response = client.put("/markers", json={"cluster_ids": [marker], "mode": "or"})
        assert response.status_code == 200

        body = client.get("/spectrum").json()
        golden = (GOLDEN_DIR / "co_spectrum.csv").read_text().splitlines()[1:]
        got = [f"{p['rpy']},{p['ncr']},{p['median5']},{p['dev']}" for p in body["points"]]
        assert got == golden

        response = client.delete("/markers")
        assert response.status_code == 200
        assert client.get("/session").json()["markers"]["cluster_ids"] == []

    def test_unknown_marker_404(self, golden_client):
        client, _ = golden_client
        response = client.put("/markers", json={"cluster_ids": ["cnotthere"]})
        assert response.status_code == 404


class TestSessionSave:
    def test_save_endpoint_writes_loadable_session(self, golden_records, tmp_path):
        path = tmp_path / "session.json"
        session = AnalysisSession(golden_records, filters=GOLDEN_FILTERS)
        client = TestClient(create_app(session, session_path=str(path)))
        refs = client.get("/years/1964/references").json()["references"]
        client.post(f"/clusters/{refs[0]['cluster_id']}/year", json={"rpy": 1963})

        response = client.post("/session/save", json={})
        assert response.status_code == 200
        restored = load_session(str(path), golden_records)
        assert [e.op for e in restored.ledger] == ["correct_year"]

    def test_save_without_destination_is_400(self, golden_records):
        session = AnalysisSession(golden_records)
        client = TestClient(create_app(session))
        assert client.post("/session/save", json={}).status_code == 400


class TestCliApiEquivalence:
    def test_spectrum_equivalence(self, golden_client, golden_corpus_path, capsys):
        from refspect.cli import main

        client, _ = golden_client
        assert main([
            "spectrum", str(golden_corpus_path),
            "--cutoff", "1971", "--range", "1686:1970",
            "--min-ncr", "1000:1900=10", "--min-ncr", "1901:1970=100",
        ]) == 0
        cli_rows = capsys.readouterr().out.splitlines()[1:]
        api_points = client.get("/spectrum", params={"from": 1686, "to": 1970}).json()["points"]
        assert len(cli_rows) == len(api_points)
        for line, point in zip(cli_rows, api_points):
            rpy, ncr, median5, dev = (int(x) for x in line.split(","))
            assert point == {"rpy": rpy, "ncr": ncr, "median5": median5, "dev": dev}
