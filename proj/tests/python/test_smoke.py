"""End-to-end smoke checks of the python bindings against the compiled core."""

import json
import os
import pathlib

import jsonschema
import numpy as np
import pytest

import divcurl

CR = '{"n": 2, "N": 3, "coeffs": [[0.0, 1.0], [0.0, 0.0]]}'


def schema_path():
    root = os.environ.get(
        "DIVCURL_SCHEMA_DIR",
        str(pathlib.Path(__file__).resolve().parents[2] / "schema"),
    )
    return pathlib.Path(root) / "report.schema.json"


def test_ellipticity_certificates():
    cert = divcurl.certify_ellipticity(divcurl.System.gradient(2))
    assert cert["elliptic"]
    assert abs(cert["constant"] - 1.0) < 1e-6

    cr = divcurl.certify_ellipticity(divcurl.System.from_json(CR))
    assert cr["elliptic"]
    assert abs(cr["constant"] - 1.0) < 1e-6

    flat = divcurl.System.from_json(
        '{"n": 2, "N": 3, "coeffs": [[0.0, 0.0], [0.0, 0.0]]}'
    )
    assert not divcurl.certify_ellipticity(flat)["elliptic"]


def test_cvf_roundtrip(tmp_path):
    g = divcurl.Grid([16, 24], [1.0, 2.0])
    f = divcurl.random_scalar_field(g, seed=7, band_limit=4)
    path = str(tmp_path / "field.cvf")
    divcurl.write_cvf(path, g, f)
    back = divcurl.read_cvf(path)
    assert back["dims"] == [16, 24]
    assert back["box"] == [1.0, 2.0]
    assert np.array_equal(back["field"], f)

    with pytest.raises(divcurl.IoError):
        divcurl.write_cvf(path, g, f)  # refuses to overwrite by default
    divcurl.write_cvf(path, g, f, overwrite=True)


def test_operators_and_hodge():
    sys = divcurl.System.from_json(CR)
    g = divcurl.Grid([24, 24, 24], [1.0, 1.0, 1.0])
    u = divcurl.random_scalar_field(g, band_limit=6)
    G = divcurl.grad_L(sys, g, u)
    assert G.shape == (2, 24, 24, 24)
    curl = divcurl.curl_L(sys, g, G)
    assert np.max(np.abs(curl)) <= 1e-10 * np.max(np.abs(G))

    V = divcurl.random_vector_field(sys, g, band_limit=6, index=3)
    dec = divcurl.hodge_decompose(sys, g, V)
    assert dec["residual_div"] < 1e-9
    assert np.max(np.abs(dec["V1"] + dec["V2"] - V)) <= 1e-12 * np.max(np.abs(V))


def test_norms():
    g = divcurl.Grid([32, 32], [4.0, 4.0])
    f = divcurl.random_scalar_field(g, band_limit=5, localize=False)
    assert divcurl.lp_norm(g, f, 2.0) > 0.0
    assert divcurl.h1_norm(g, f) > 0.0
    three = np.full((32, 32), 3.0, dtype=np.complex128)
    assert abs(divcurl.bmo_norm(g, three, 4, [0.5, 1.5]) - 3.0) < 1e-12


def test_witness_pair():
    sys = divcurl.System.gradient(2)
    g = divcurl.Grid([256, 256], [8.0, 8.0])
    pair = divcurl.witness_pair(sys, g, "small_p", 4.0 / 3.0, radius=2.0, width=0.24)
    assert pair["cert"]["pass"]
    assert all(e["pass"] for e in pair["cert"]["entries"])
    assert pair["V"].shape == (2, 256, 256)

    with pytest.raises(divcurl.IoError):
        divcurl.witness_pair(sys, g, "spinor", 2.0)


def test_run_experiment_matches_schema():
    report = divcurl.run_experiment(
        {
            "experiment": "thm-a",
            "grid": {"dims": [16, 16]},
            "ensemble": {"count": 2, "band_limit": 4},
            "p_list": [2.0],
            "scales": 3,
        }
    )
    schema = json.loads(schema_path().read_text())
    jsonschema.validate(report, schema)
    assert report["pass"]
    assert len(report["trials"]) == 2

    cfg = divcurl.default_experiment_config("thm-b")
    assert cfg["experiment"] == "thm-b"
    assert cfg["grid"]["dims"] == [64, 64]
