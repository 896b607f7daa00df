from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from parafrac.cli import main, parse_config
from parafrac.errors import ConfigError
from parafrac.powerseries import Germ
from parafrac.recovery import generate_orbit


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    return str(p)


ZZ2 = {"germ": {"coefficients": [1, 1]}, "z0": -0.3}


def test_analyze_minimal(tmp_path):
    out = tmp_path / "out"
    assert main(["analyze", "--config", write(tmp_path, ZZ2), "--out-dir", str(out), "--threads", "1"]) == 0
    with open(out / "measurements.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "eps" and len(rows) == 65
    # full precision: every value parses back to the float that was written
    assert all(repr(float(r[0])) == repr(float(r[0])) for r in rows[1:])
    report = json.loads((out / "report.json").read_text())
    assert report["command"] == "analyze" and report["config"] == ZZ2
    res = report["result"]
    assert res["k"] == 1 and res["degraded"] is False
    assert abs(res["invariants"]["fractal_recovery"]["a1"][0] - 1) < 0.02


def test_malformed_json_writes_nothing(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["analyze", "--config", write(tmp_path, "{germ: ["), "--out-dir", str(out)]) == 1
    assert not out.exists()
    assert "malformed JSON" in capsys.readouterr().err


@pytest.mark.parametrize("cfg", [
    {},
    {"germ": {"coefficients": [2, 1]}},
    {"germ": {"coefficients": [1, 1], "k": 2}},
    {"germ": {"coefficients": [1, 1]}, "eps_grid": {"min": 1e-3, "max": 1e-4}},
    {"germ": {"coefficients": [1, 1]}, "outputs": {"report": "../x.json"}},
    {"germ": {"coefficients": [1, 1]}, "conjugators": [[2, 1]]},
    {"germ": {"coefficients": [1, 1]}, "basis": "other"},
])
def test_config_errors(tmp_path, cfg):
    with pytest.raises(ConfigError):
        parse_config(cfg)
    assert main(["analyze", "--config", write(tmp_path, cfg), "--out-dir", str(tmp_path / "o")]) == 1
    assert not (tmp_path / "o").exists()


def test_missing_config_file(tmp_path):
    assert main(["analyze", "--config", str(tmp_path / "nope.json")]) == 1
    assert main(["analyze"]) == 1


def test_germ_padding_and_complex_values():
    cfg = parse_config({"germ": {"coefficients": [1, 0, [1, 1]]}, "z0": [0, 0.3]})
    assert cfg.germ.k == 2 and cfg.germ.order == 10 and cfg.germ.a1 == 1 + 1j
    assert cfg.z0 == 0.3j


def test_dry_run(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["analyze", "--config", write(tmp_path, ZZ2), "--out-dir", str(out), "--dry-run"]) == 0
    plan = json.loads(capsys.readouterr().out)
    assert plan["k"] == 1 and plan["count"] == 64
    actual = len(generate_orbit(Germ.from_coeffs([1, 1], order=8), -0.3, plan["eps_min"]))
    assert abs(plan["planned_orbit_length"] / actual - 1) < 0.05
    assert not out.exists()


def test_degraded_exit_code(tmp_path):
    cfg = {"germ": {"coefficients": [1, 0, 1, 1, [0.5, 0.5]]}, "z0": [0, 0.3]}
    out = tmp_path / "out"
    assert main(["analyze", "--config", write(tmp_path, cfg), "--out-dir", str(out), "--threads", "1"]) == 2
    assert json.loads((out / "report.json").read_text())["result"]["degraded"] is True


def test_verify(tmp_path):
    cfg = dict(ZZ2, conjugators=[[1, 1], [1, 3], [1]], scale=2)
    out = tmp_path / "out"
    assert main(["verify", "--config", write(tmp_path, cfg), "--out-dir", str(out), "--threads", "1"]) == 0
    res = json.loads((out / "invariance.json").read_text())["result"]
    assert res["passed"] and len(res["conjugators"]) == 3
    ident = res["conjugators"][2]["deviations"]
    assert ident["M_c_relative"] == 0 and ident["R_c_relative"] == 0
    assert res["scaling"]["dim_B_difference"] < 0.02


ORACLE = dict(ZZ2, oracle={"samples": 1000, "eps": [1e-3, 1e-2]})


def test_oracle_check_with_few_samples(tmp_path):
    out = tmp_path / "out"
    assert main(["oracle-check", "--config", write(tmp_path, ORACLE), "--out-dir", str(out)]) == 0
    res = json.loads((out / "oracle.json").read_text())["result"]
    assert res["passed"] and res["requested_samples"] == 1000
    assert all(r["samples"] == 10_000 for r in res["rows"])


def test_oracle_check_negative_control(tmp_path):
    cfg = dict(ZZ2, oracle={"samples": 1_000_000, "eps": [1e-2]})
    out = tmp_path / "out"
    args = ["oracle-check", "--config", write(tmp_path, cfg), "--out-dir", str(out)]
    assert main(args) == 0
    assert main(args + ["--corrupt-exact", "0.05"]) == 3


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "parafrac.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "parafrac" in r.stdout
