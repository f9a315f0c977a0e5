"""HTTP layer: every endpoint against in-process oracles.

The handlers wrap library calls, so each endpoint is checked against
the direct library result computed in the test; transport concerns
(validation codes, optional fields) get their own cases.
"""

import math

import pytest
from fastapi.testclient import TestClient

from polarvqe import service
from polarvqe.chemistry import CavityParams, Geometry, compute_sto3g_h2, parse_integrals
from polarvqe.hamiltonian import build_plan, encode_hamiltonian, photon_number_observable
from polarvqe.scans import CSV_COLUMNS
from polarvqe.vqe import fci_solve

EXACT_PROTOCOL = {"shots": None, "mitigation": [], "repeats": 1, "seed": 9}


@pytest.fixture(scope="module")
def client():
    return TestClient(service.create_app())


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert isinstance(body["version"], str) and body["version"]


def test_integrals_round_trip(client):
    resp = client.post("/integrals", json={"molecule": {"r_angstrom": 0.9},
                                           "cavity": {"omega_ev": 2.0, "lambda_x": 0.05}})
    assert resp.status_code == 200
    body = resp.json()
    ints = compute_sto3g_h2(Geometry.h2(0.9))
    assert body["n_spatial"] == 2
    assert body["rhf_energy"] == pytest.approx(ints.rhf_energy(), abs=1e-12)
    assert body["nuclear_repulsion"] == pytest.approx(ints.e_nuc, abs=1e-12)
    parsed, cav = parse_integrals(body["text"])
    assert cav is not None
    assert cav.lambda_vec[0] == pytest.approx(0.05)
    assert parsed.rhf_energy() == pytest.approx(ints.rhf_energy(), abs=1e-10)


def test_integrals_without_cavity(client):
    body = client.post("/integrals", json={}).json()
    _, cav = parse_integrals(body["text"])
    assert cav is None


def test_fci_matches_library(client):
    resp = client.post("/fci", json={"molecule": {"r_angstrom": 0.735},
                                     "cavity": {"omega_ev": 2.0, "lambda_x": 0.1}})
    assert resp.status_code == 200
    body = resp.json()
    ints = compute_sto3g_h2(Geometry.h2(0.735))
    cav = CavityParams.from_ev(2.0, lambda_x=0.1)
    plan = build_plan(ints, cav)
    fci = fci_solve(encode_hamiltonian(ints, cav, plan), photon_number_observable(plan))
    assert body["energy"] == pytest.approx(fci.energy, abs=1e-12)
    assert body["photon_number"] == pytest.approx(fci.photon_number, abs=1e-12)
    assert body["n_qubits"] == 2


def test_semantic_error_maps_to_400(client):
    resp = client.post("/fci", json={"cavity": {"omega_ev": -2.0}})
    assert resp.status_code == 400
    assert "positive" in resp.json()["detail"]


def test_shape_error_maps_to_422(client):
    resp = client.post("/fci", json={"encoding": {"mapping": "parity"}})
    assert resp.status_code == 422


def test_vqe_noiseless_reaches_fci(client):
    resp = client.post("/vqe", json={
        "cavity": {"omega_ev": 2.0, "lambda_x": 0.1},
        "protocol": EXACT_PROTOCOL,
    })
    assert resp.status_code == 200
    body = resp.json()
    assert body["energy"]["raw"] == pytest.approx(body["fci_energy"], abs=1e-6)
    assert body["energy"]["rzne"] is None
    assert body["photon"]["raw"] == pytest.approx(body["fci_photon_number"], abs=1e-6)
    assert len(body["params"]) == 2
    assert body["rmse"]["raw"] < 1e-6


def test_vqe_photon_measurement_optional(client):
    resp = client.post("/vqe", json={"protocol": EXACT_PROTOCOL,
                                     "measure_photon": False})
    assert resp.json()["photon"] is None


def test_scan_dissociation_rows(client):
    resp = client.post("/scan/dissociation", json={
        "r_values": [0.7, 0.9], "lambda_x": 0.1,
        "protocol": EXACT_PROTOCOL,
    })
    assert resp.status_code == 200
    body = resp.json()
    assert body["columns"] == list(CSV_COLUMNS)
    assert [row["r_angstrom"] for row in body["rows"]] == [0.7, 0.9]
    for row in body["rows"]:
        assert row["error"] is None
        assert row["e_raw"] == pytest.approx(row["e_fci"], abs=1e-6)
    assert body["manifest"]["kind"] == "dissociation"


def test_scan_coupling_uses_equilibrium_geometry(client):
    resp = client.post("/scan/coupling", json={
        "lambda_values": [0.0], "omega_ev": 20.0,
        "protocol": EXACT_PROTOCOL, "measure_photon": False,
    })
    assert resp.status_code == 200
    row = resp.json()["rows"][0]
    assert row["r_angstrom"] == pytest.approx(0.735, abs=0.003)
    assert row["n_raw"] is None


def test_ablation_endpoint(client):
    resp = client.post("/ablate-xgate", json={
        "cavity": {"omega_ev": 2.0, "lambda_x": 0.1},
        "protocol": {"shots": None, "mitigation": [], "maxiter": 80, "seed": 4},
    })
    assert resp.status_code == 200
    body = resp.json()
    for key in ("sign_flipped", "x_initialized"):
        variant = body[key]
        assert variant["label"] == key
        assert len(variant["energies"]) == 20
        assert math.isfinite(variant["mean_energy"])
        assert variant["percent_error"] < 0.01


def test_resources_endpoint(client):
    body = client.post("/resources", json={}).json()
    table = {(r["mapping"], r["taper"]): r for r in body["rows"]}
    assert table[("jw", "none")]["n_qubits"] == 5
    assert table[("bk", "none")]["n_qubits"] == 3
    assert table[("bk", "parity")]["n_qubits"] == 2
    assert table[("bk", "parity")]["n_cnots"] == 2
    assert table[("bk", "parity")]["n_params"] == 2
