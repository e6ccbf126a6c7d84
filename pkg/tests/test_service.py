"""HTTP service endpoints: contracts, artifacts, error mapping."""

from __future__ import annotations

import json

import pytest
from starlette.testclient import TestClient

from qubonet.data import gen_circles, dumps_csv, loads_csv
from qubonet.service.app import create_app


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app(), raise_server_exceptions=False) as c:
        yield c


BASE = {"features": 2, "hidden": 2, "bits": 1}
SMALL_DS = {"kind": "generated", "name": "circles", "n": 50, "seed": 1}


class TestHealth:
    def test_healthz(self, client):
        r = client.get("/healthz")
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "ok"
        assert "version" in body


class TestCompileEndpoint:
    def test_counts_and_model(self, client):
        r = client.post("/api/compile", json=BASE)
        assert r.status_code == 200
        body = r.json()
        assert body["counts"] == {
            "abstract_spins": 7, "n_vw": 6, "n_vww": 12, "n_ww": 2,
            "n_aux": 20,
        }
        model = body["model"]
        assert model["qubo"]["n_vars"] == 27
        assert "content_hash" in model
        assert body["metadata"]["task"] == "compile"

    def test_bias_counts(self, client):
        r = client.post(
            "/api/compile", json={**BASE, "first_layer_bias": True}
        )
        assert r.status_code == 200
        counts = r.json()["counts"]
        assert counts["n_vw"] == 9
        assert counts["n_vww"] == 27

    def test_unknown_field_rejected(self, client):
        r = client.post("/api/compile", json={**BASE, "hideen": 3})
        assert r.status_code == 422

    def test_bad_activation_is_config_error(self, client):
        r = client.post("/api/compile", json={**BASE, "activation": "tanh"})
        assert r.status_code == 422
        body = r.json()
        assert body["kind"] == "config"
        assert "square" in body["detail"]

    def test_csv_dataset(self, client):
        text = dumps_csv(gen_circles(n=30, seed=2))
        r = client.post(
            "/api/compile",
            json={**BASE, "dataset": {"kind": "csv", "text": text}},
        )
        assert r.status_code == 200

    def test_generic_path_requested(self, client):
        r = client.post("/api/compile", json={**BASE, "path": "generic"})
        assert r.status_code == 200
        assert r.json()["model"]["path"] == "generic"


class TestTrainEndpoint:
    def test_exact_solver_run(self, client):
        r = client.post(
            "/api/train",
            json={**BASE, "dataset": SMALL_DS, "solver": "exact"},
        )
        assert r.status_code == 200
        body = r.json()
        m = body["metrics"]
        assert m["solver"] == "exact"
        assert 0.0 <= m["auc"] <= 1.0
        offset = body["model"]["offset"]
        assert m["training_loss"] == pytest.approx(
            m["best_energy"] + offset, abs=1e-9
        )
        assert m["training_loss"] >= 0.0
        assert m["n_minima"] >= 1
        assert set(m["decoded"]) == {"w", "v", "v0"}
        assert body["boundary_csv"].startswith("x1,x2,Y")
        hashes = body["metadata"]["artifact_hashes"]
        assert {"model", "metrics", "samples"} <= set(hashes)

    def test_sa_solver_run(self, client):
        r = client.post(
            "/api/train",
            json={**BASE, "dataset": SMALL_DS, "solver": "sa", "reads": 20,
                  "sweeps": 200, "seed": 3},
        )
        assert r.status_code == 200
        m = r.json()["metrics"]
        assert m["solver"] == "sa"
        assert m["n_samples"] == 20

    def test_remote_without_endpoint_is_config_error(self, client):
        r = client.post(
            "/api/train",
            json={**BASE, "dataset": SMALL_DS, "solver": "remote"},
        )
        assert r.status_code == 422
        assert r.json()["kind"] == "config"

    def test_unknown_solver_rejected(self, client):
        r = client.post(
            "/api/train",
            json={**BASE, "dataset": SMALL_DS, "solver": "dwave"},
        )
        assert r.status_code == 422

    def test_boundary_grid_parses(self, client):
        r = client.post(
            "/api/train",
            json={**BASE, "dataset": SMALL_DS, "solver": "exact",
                  "resolution": 5},
        )
        lines = r.json()["boundary_csv"].strip().splitlines()
        assert len(lines) == 1 + 25
        for ln in lines[1:]:
            x1, x2, y = (float(v) for v in ln.split(","))
            assert all(map(lambda z: z == z, (x1, x2, y)))


class TestCompareEndpoint:
    def test_classical_block_present(self, client):
        r = client.post(
            "/api/compare",
            json={**BASE, "dataset": SMALL_DS, "solver": "exact",
                  "runs": 3, "steps": 150},
        )
        assert r.status_code == 200
        c = r.json()["metrics"]["classical"]
        assert c["requested_runs"] == 3
        assert c["completed_runs"] <= 3
        assert len(c["aucs"]) == c["completed_runs"]
        assert set(c) >= {"aucs", "median", "p20", "p80", "omega"}


class TestReduceEndpoint:
    def test_pass_report(self, client):
        r = client.post(
            "/api/reduce",
            json={"polynomial": "#basis: spin\n1.0 0 1 2\n", "lambda": 3.0},
        )
        assert r.status_code == 200
        body = r.json()
        assert body["report"]["passed"] is True
        assert body["report"]["n_minima_original"] == 4
        assert body["n_aux"] == 1
        assert "#reduction" in body["model_text"]

    def test_fail_report(self, client):
        r = client.post(
            "/api/reduce",
            json={"polynomial": "#basis: spin\n1.0 0 1 2\n", "lambda": 1.0},
        )
        assert r.status_code == 200
        assert r.json()["report"]["passed"] is False

    def test_verification_skip_above_cap(self, client):
        r = client.post(
            "/api/reduce",
            json={"polynomial": "#basis: unit\n1.0 0 1 2\n", "max_vars": 2},
        )
        assert r.status_code == 200
        rep = r.json()["report"]
        assert rep["skipped"] is True
        assert "2" in rep["reason"]

    def test_parse_error_maps_to_422(self, client):
        r = client.post("/api/reduce", json={"polynomial": "1.0 0\n"})
        assert r.status_code == 422


class TestDatasetEndpoint:
    def test_generates_loadable_csv(self, client):
        r = client.post(
            "/api/datasets/generate",
            json={"name": "bands", "n": 45, "seed": 4},
        )
        assert r.status_code == 200
        ds = loads_csv(r.json()["csv"])
        assert ds.n_points == 45

    def test_unknown_generator_rejected(self, client):
        r = client.post("/api/datasets/generate", json={"name": "moons"})
        assert r.status_code == 422


class TestSampleEndpoint:
    """The wire contract this package's remote client expects."""

    def test_sample_round_trip(self, client):
        qubo = {
            "n_vars": 2,
            "linear": {"0": -1.0},
            "quadratic": {"0 1": 2.0},
            "offset": 0.0,
        }
        r = client.post(
            "/api/sample", json={"qubo": qubo, "num_reads": 10}
        )
        assert r.status_code == 200
        samples = r.json()["samples"]
        assert sum(s["occurrences"] for s in samples) == 10
        best = min(samples, key=lambda s: s["energy"])
        assert best["assignment"] == [1, 0]
        assert best["energy"] == pytest.approx(-1.0)

    def test_remote_client_loopback(self, client):
        # the package's own client can consume this service
        from qubonet.qubo import QuboModel
        from qubonet.solvers import SamplerConfig, best_of, remote_sample

        model = QuboModel(
            n_vars=2, linear={0: -1.0}, quadratic={(0, 1): 2.0}, offset=0.0
        )
        samples = remote_sample(
            model,
            SamplerConfig(num_reads=25, seed=0),
            endpoint="http://testserver/api/sample",
            token="local",
            client=client,
        )
        assert best_of(samples).energy == pytest.approx(-1.0)

    def test_malformed_qubo_rejected(self, client):
        r = client.post("/api/sample", json={"qubo": {"n_vars": -1}})
        assert r.status_code == 422
