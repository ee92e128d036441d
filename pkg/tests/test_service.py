import numpy as np
import pytest
from fastapi.testclient import TestClient

import lsa
from lsa import constructions, formats
from lsa.service.app import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def dictionary_payload(D):
    return formats.dictionary_to_dict(D)


class TestAnalyze:
    def test_identity(self, client):
        D = lsa.new_dictionary(np.eye(4))
        r = client.post("/v1/analyze", json={"dictionary": dictionary_payload(D), "k": 2})
        assert r.status_code == 200
        doc = r.json()
        assert doc["coherence"] == 0.0
        assert doc["spark"] == "infinite"
        assert doc["generalized_coherence"] == {"1": 0.0, "2": 0.0}

    def test_mu_k_tight(self, client):
        D = constructions.mu_k_tight(2, 3).dictionary
        r = client.post("/v1/analyze", json={"dictionary": dictionary_payload(D), "k": 2})
        doc = r.json()
        assert doc["coherence"] == pytest.approx(1 / 3, abs=1e-12)
        assert doc["generalized_coherence"]["2"] == pytest.approx(1.0, abs=1e-9)

    def test_invalid_dictionary_is_400(self, client):
        bad = {"schema": "lsa/1", "m": 2, "n": 1, "complex": False, "columns": [[2.0, 0.0]]}
        r = client.post("/v1/analyze", json={"dictionary": bad, "k": 1})
        assert r.status_code == 400
        assert r.json()["error"] == "NotNormalized"

    def test_budget_is_422(self, client):
        D = constructions.equiangular_lines_2d(10).dictionary
        r = client.post(
            "/v1/analyze", json={"dictionary": dictionary_payload(D), "k": 1, "budget": 2}
        )
        assert r.status_code == 422
        assert r.json()["error"] == "BudgetExceeded"


class TestConstructAndSolve:
    def test_pipeline(self, client):
        r = client.post(
            "/v1/construct",
            json={"name": "identity-bad-b", "params": {"m": 5, "k": 2, "eps": 0.5}},
        )
        assert r.status_code == 200
        doc = r.json()
        assert doc["predicted"]["qualifying_support_count"] == 4
        r2 = client.post(
            "/v1/solve",
            json={
                "dictionary": doc["dictionary"],
                "target": doc["targets"][0],
                "problem": "approx",
                "k": 2,
                "eps": 0.5,
                "restrict": 1,
            },
        )
        assert r2.status_code == 200
        sol = r2.json()
        assert sol["support_count"] == 4
        assert sol["restricted_counts"] == {"1": 1}
        assert all(0 in s["support"] for s in sol["solutions"])

    def test_solve_sparse_finite_flag(self, client):
        A = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
        D = lsa.new_dictionary(A)
        r = client.post(
            "/v1/solve",
            json={
                "dictionary": dictionary_payload(D),
                "target": {"label": "b", "values": [1.0, 0.0]},
                "problem": "sparse",
                "k": 2,
            },
        )
        assert r.status_code == 200
        assert r.json()["finite"] is False

    def test_unknown_construction_is_400(self, client):
        r = client.post("/v1/construct", json={"name": "nonesuch"})
        assert r.status_code == 400

    def test_kerdock_shape(self, client):
        r = client.post("/v1/construct", json={"name": "kerdock", "params": {"m": 4}})
        doc = r.json()
        assert doc["dictionary"]["m"] == 16
        assert doc["dictionary"]["n"] == 256
        assert doc["dictionary"]["complex"] is True

    def test_spikes_shape(self, client):
        r = client.post("/v1/construct", json={"name": "spikes-sines", "params": {"d": 2}})
        doc = r.json()
        assert doc["dictionary"]["m"] == 16 and doc["dictionary"]["n"] == 32


class TestBounds:
    def test_spherical(self, client):
        r = client.post("/v1/bounds", json={"name": "spherical", "mu": 0.25, "eps": 0.6})
        assert r.json()["value"] == 1
        r = client.post("/v1/bounds", json={"name": "spherical", "mu": 0.25, "eps": 0.9})
        assert r.json()["value"] == "not_applicable"

    def test_uniqueness_flags(self, client):
        r = client.post(
            "/v1/bounds", json={"name": "uniqueness", "mu": 0.25, "k": 2, "spark": 8}
        )
        assert r.json()["value"]["unique_by_mu"] is True

    def test_missing_parameter_is_400(self, client):
        r = client.post("/v1/bounds", json={"name": "spherical", "mu": 0.25})
        assert r.status_code == 400


class TestVerify:
    def test_kerdock_suite_clean(self, client):
        r = client.post("/v1/verify", json={"suite": "kerdock", "seed": 42})
        assert r.status_code == 200
        doc = r.json()
        assert doc["violations"] == 0
        assert doc["reports"]


class TestCompress:
    def test_lossless_at_full_keep(self, client):
        from lsa import waveletlab

        img = waveletlab.synthetic_blobs(16, seed=0)
        r = client.post(
            "/v1/compress",
            json={"pixels": img.pixels.tolist(), "class": 2, "keep": 1.0, "depth": 2},
        )
        assert r.status_code == 200
        assert r.json()["stats"]["relative_error"] <= 1e-10
        assert np.allclose(np.array(r.json()["pixels"]), img.pixels, atol=1e-9)

    def test_seeded_class1_deterministic(self, client):
        from lsa import waveletlab

        img = waveletlab.synthetic_blobs(16, seed=0)
        req = {"pixels": img.pixels.tolist(), "class": 1, "depth": 2, "seed": 3}
        a = client.post("/v1/compress", json=req).json()
        b = client.post("/v1/compress", json=req).json()
        assert a == b
