"""End-to-end smoke tests for the python bindings.

Kept at a coarse grid so the whole file runs in seconds; the heavy numerical
claims live in the C++ acceptance suite.
"""

import json
import math

import pytest

import resonance_atlas as ra

CONFIG = {
    "problem": {
        "V1": [{"kind": "scaled-tanh", "amplitude": 1.0}],
        "V2": [{"kind": "scaled-tanh", "amplitude": -1.0}],
        "r0": [{"kind": "constant", "amplitude": 1.0}],
        "E0": 0.5,
        "nu": 1.0,
    },
    "h_list": [0.1],
    "search_rect": {"re_lo": 0.35, "re_hi": 0.65, "im_lo": -0.1, "im_hi": 0.0},
    "spectral": {"theta": 0.3, "theta_prime": 0.35, "L": 12.0, "N": 256},
}


def test_analyze_structure():
    rep = ra.analyze(CONFIG)
    assert rep["hypotheses"]["passed"] is True
    assert rep["graph"]["vertex_count"] == 4
    assert rep["graph"]["edge_count"] == 4
    assert rep["cycles"]["count"] == 1
    assert rep["cycles"]["pr_count"] == 1
    assert rep["band"]["M"] == pytest.approx(0.303331, rel=1e-4)
    assert rep["graph"]["max_flow_residual"] < 1e-6


def test_analyze_accepts_json_strings():
    rep = ra.analyze(json.dumps(CONFIG))
    assert rep["cycles"]["pr_count"] == 1


def test_candidates_winding_matches_roots():
    rep = ra.candidates(CONFIG)
    (run,) = rep["runs"]
    assert run["root_count"] >= 1
    assert run["winding"] == run["root_count"]
    depth = 0.1 / 3.29673 * (math.log(10.0) - math.log(2.2214414691))
    for root in run["roots"]:
        assert root["im"] == pytest.approx(-depth, rel=1e-4)


def test_verify_report_structure():
    rep = ra.verify(CONFIG, jobs=1)
    assert isinstance(rep["band_empty"], bool)
    (run,) = rep["runs"]
    expected_radius = 0.6 * rep["M_used"] * 0.1 * math.log(10.0)
    assert run["band_radius"] == pytest.approx(expected_radius, rel=1e-9)
    # margin is null when nothing qualifies, and at least 1 whenever empty
    margin = run["margin"]
    assert run["empty"] == (margin is None or margin >= 1.0)


def test_run_writes_artifacts(tmp_path):
    out = ra.run("analyze", CONFIG, out_dir=str(tmp_path), jobs=1)
    assert out["exit_code"] == 0
    run_dir = out["output_path"]
    assert run_dir.startswith(str(tmp_path))
    report = json.loads((open(f"{run_dir}/analyze.json").read()))
    assert report["cycles"]["pr_count"] == 1


def test_canonical_config_round_trip():
    canon = ra.canonical_config(CONFIG)
    assert canon["safety_c"] == 0.6
    assert ra.canonical_config(canon) == canon
    assert len(ra.config_hash(CONFIG)) == 16
    assert ra.config_hash(CONFIG) == ra.config_hash(canon)


def test_invalid_config_raises_value_error():
    bad = json.loads(json.dumps(CONFIG))
    bad["problem"]["nu"] = 0.4
    with pytest.raises(ValueError, match="nu must exceed 1/2"):
        ra.analyze(bad)

    with pytest.raises(ValueError):
        ra.run("explode", CONFIG)
