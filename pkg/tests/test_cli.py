import csv
import json
import math

import pytest
from scipy import special

from diracwave.cli import main


def _rows(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config: ")
    body = [ln for ln in lines if not ln.startswith("#")]
    return json.loads(lines[0][len("# config: "):]), list(csv.DictReader(body))


def _run(tmp_path, *argv):
    return main([*argv, "--out-dir", str(tmp_path), "--workers", "1"])


def test_eval_bessel_point(tmp_path):
    assert _run(tmp_path, "eval", "--k", "1", "--rho", "0.5,3.14159") == 0
    cfg, rows = _rows(tmp_path / "eval.csv")
    assert cfg["k"] == 1
    assert [r["method_used"] for r in rows] == ["series", "series"]
    F = float(rows[1]["F"])
    G = float(rows[1]["G"])
    assert F == pytest.approx(special.spherical_jn(1, 3.14159) / math.sqrt(2), rel=1e-12)
    assert G == pytest.approx(special.spherical_jn(0, 3.14159) / math.sqrt(2), rel=1e-6)
    assert float(rows[0]["j0"]) == pytest.approx(math.hypot(float(rows[0]["F"]), float(rows[0]["G"])))


def test_eval_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    argv = ["eval", "--k", "-3", "--nu", "0.4", "--rho-min", "0.1", "--rho-max", "300", "--points", "12"]
    assert _run(a, *argv) == 0 and _run(b, *argv) == 0
    assert (a / "eval.csv").read_bytes() == (b / "eval.csv").read_bytes()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"k": 2, "nu": 0.25, "rho": "1.0"}))
    assert _run(tmp_path, "eval", "--config", str(cfg), "--nu", "0.5") == 0
    echo, rows = _rows(tmp_path / "eval.csv")
    assert echo["k"] == 2 and echo["nu"] == 0.5
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bogus": 1}))
    assert _run(tmp_path, "eval", "--k", "1", "--config", str(bad)) == 2


@pytest.mark.parametrize("argv", [
    ["eval", "--k", "1", "--nu", "1.5", "--rho", "1"],
    ["eval", "--k", "0", "--rho", "1"],
    ["eval", "--k", "1", "--points", "0"],
    ["eval", "--k", "1", "--rho", "abc"],
    ["saddle-dump", "--gamma", "3", "--rho", "-2"],
    ["eval"],
])
def test_usage_errors(tmp_path, argv):
    assert _run(tmp_path, *argv) == 2


def test_strichartz_divergent_q(tmp_path):
    assert _run(tmp_path, "strichartz", "--nu", "0.5", "--q", "4") == 4


@pytest.mark.parametrize("q, case", [(1.0, "modified_1b"), (0.6, "gamma_lr"), (1.5, "gamma_minus")])
def test_saddle_dump(tmp_path, q, case):
    assert _run(tmp_path, "saddle-dump", "--q", str(q), "--rho", "3", "--per-segment", "8") == 0
    _, rows = _rows(tmp_path / "contour.csv")
    assert {r["case"] for r in rows} == {case}


def test_verify_envelope_small(tmp_path):
    rc = _run(tmp_path, "verify-envelope", "--k", "1,-2,4", "--nu", "0,0.5",
              "--rho-min", "0.05", "--rho-max", "40", "--points", "15")
    assert rc == 0
    doc = json.loads((tmp_path / "envelope.json").read_text())
    assert doc["ok"] and doc["worst_ratio"] <= 1.0
    assert "versions" in doc or "config" in doc


def test_verify_dyadic_small(tmp_path):
    assert _run(tmp_path, "verify-dyadic", "--k", "1,3", "--exp-max", "6") == 0
    assert (tmp_path / "dyadic.json").exists()


@pytest.fixture
def descriptor(tmp_path):
    d = {"nu": 0.5,
         "channels": [
             {"k": 1, "m": 0.5, "profile": {"type": "gaussian",
                                            "params": {"center": 3, "width": 1, "plus": 1, "minus": [0, 0.5]}}},
             {"k": 2, "m": -0.5, "profile": {"type": "spike", "params": {"energy": 2.0}}}],
         "grids": {"rmin": 1e-6, "rmax": 16, "du": 0.06}}
    p = tmp_path / "desc.json"
    p.write_text(json.dumps(d))
    return p


def test_hankel_and_evolve(tmp_path, descriptor):
    assert _run(tmp_path, "hankel", "--data", str(descriptor)) == 0
    summary = json.loads((tmp_path / "hankel.json").read_text())
    assert summary["config"]
    assert _run(tmp_path, "evolve", "--data", str(descriptor), "--t", "0,1.5") == 0
    assert (tmp_path / "evolve.csv").exists()


@pytest.mark.parametrize("bad", [
    "{not json",
    json.dumps({"nu": 0.5, "channels": [{"k": 1, "m": 2.5, "profile": {"type": "gaussian", "params": {}}}]}),
    json.dumps({"nu": 0.5, "channels": [{"k": 1, "m": 0.5, "profile": {"type": "wave", "params": {}}}]}),
])
def test_bad_descriptor(tmp_path, bad):
    p = tmp_path / "bad.json"
    p.write_text(bad)
    assert _run(tmp_path, "hankel", "--data", str(p)) == 2
