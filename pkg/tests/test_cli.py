import json
import os

import pytest

from semiscat.cli import dumps, run
from semiscat.config import DEFAULTS, ExperimentConfig


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


FREE = """
[potential]
bumps = []
"""


def _json(out, name):
    with open(os.path.join(out, name)) as fh:
        return json.load(fh)


def test_smatrix_free_identity(tmp_path):
    cfg = _write(tmp_path, "free.toml", FREE)
    out = str(tmp_path / "o")
    assert run(["smatrix", "--config", cfg, "--out", out, "--jobs", "1"]) == 0
    doc = _json(out, "smatrix.json")
    r = doc["result"]["runs"]["h=0.05"]
    assert doc["result"]["potential_is_zero"]
    assert abs(r["delta1"]) < 1e-12 and r["identity_deviation"] < 1e-10
    assert r["correspondence_passed"]
    assert doc["config_hash"] == ExperimentConfig.resolve(cfg, {"out": out}).hash()
    assert os.path.exists(os.path.join(out, "smatrix_profile_h0.05.csv"))


def test_scatmap_rows(tmp_path):
    out = str(tmp_path / "o")
    assert run(["scatmap", "--grid", "64", "--out", out]) == 0
    lines = open(os.path.join(out, "scatmap.csv")).read().strip().splitlines()
    assert lines[0] == "eta,omega_out_angle,eta_out,time_delay"
    assert len(lines) == 65


def test_determinism(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert run(["smatrix", "--h", "0.1", "--out", a]) == 0
    assert run(["smatrix", "--h", "0.1", "--out", b]) == 0
    first = open(os.path.join(a, "smatrix.json"), "rb").read()
    second = open(os.path.join(b, "smatrix.json"), "rb").read()
    # the output directory is part of the echoed config; results agree exactly
    assert (dumps(json.loads(first)["result"]) == dumps(json.loads(second)["result"]))
    assert run(["smatrix", "--h", "0.1", "--out", a]) == 0
    assert open(os.path.join(a, "smatrix.json"), "rb").read() == first


def test_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "o")
    assert run(["smatrix", "--h", "-1", "--out", out]) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["exit_code"] == 2 and err["error"] == "ValidationError"
    assert run(["nonsense"]) == 2
    assert run(["smatrix", "--config", str(tmp_path / "missing.toml")]) == 2
    assert run(["smatrix", "--config", _write(tmp_path, "bad.toml", "dim = [")]) == 2
    assert run(["smatrix", "--config", _write(tmp_path, "shell.toml", "[state]\nxi0 = [0.6, 0.6]\n"),
                "--out", out]) == 2


def test_domain_error_exit_code(tmp_path, capsys):
    # a trapping guard shorter than the crossing time reports a trapped trajectory
    cfg = _write(tmp_path, "dom.toml", "[integrator]\nt_max_factor = 0.5\n")
    assert run(["smatrix", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["exit_code"] == 3 and err["error"] == "TrappedTrajectory"


def test_gs_defaults(tmp_path, monkeypatch):
    alt = _write(tmp_path, "alt.toml", "h = [0.2]\n")
    monkeypatch.setenv("GS_DEFAULTS", alt)
    assert ExperimentConfig.resolve().hs == [0.2]
    out = str(tmp_path / "o")
    assert run(["smatrix", "--out", out]) == 0
    assert "h=0.2" in _json(out, "smatrix.json")["result"]["runs"]


def test_config_round_trip_and_hash():
    cfg = ExperimentConfig.resolve()
    back = ExperimentConfig.from_json(cfg.to_json())
    assert back.data == cfg.data and back.hash() == cfg.hash()
    other = ExperimentConfig.resolve(overrides={"h": [0.1]})
    assert other.hash() != cfg.hash()
    assert DEFAULTS["h"] == [0.05]


def test_config_validation():
    from semiscat.errors import ValidationError
    with pytest.raises(ValidationError):
        ExperimentConfig.resolve(overrides={"dim": 4})
    with pytest.raises(ValidationError):
        ExperimentConfig.resolve(overrides={"integrator": {"tol": float("nan")}})
    with pytest.raises(ValidationError):
        ExperimentConfig.resolve(overrides={"h": []})


def test_dumps_format():
    text = dumps({"b": 0.1, "a": [1j, 2.0], "c": True})
    assert text.index('"a"') < text.index('"b"')
    assert "0.10000000000000001" in text
    assert json.loads(text)["a"][0] == {"im": 1.0, "re": 0.0}


def test_three_dims_and_farfield(tmp_path):
    out = str(tmp_path / "o")
    assert run(["smatrix", "--dim", "3", "--h", "0.1", "--out", out]) == 0
    assert _json(out, "smatrix.json")["result"]["runs"]["h=0.1"]["correspondence_passed"]
    assert run(["farfield", "--grid", "64", "--h", "0.1", "--out", out]) == 0
    assert run(["resolve", "--dim", "3", "--out", out]) == 2


def test_propagate_and_jobs(tmp_path):
    out = str(tmp_path / "o")
    assert run(["propagate", "--h", "0.1", "--h", "0.05", "--out", out, "--jobs", "2"]) == 0
    runs = _json(out, "propagate.json")["result"]["runs"]
    assert set(runs) == {"h=0.1", "h=0.05"}
    r = runs["h=0.1"]
    assert r["norm_out"] == pytest.approx(r["norm_in"], rel=1e-8)
