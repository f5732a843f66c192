"""End-to-end CLI runs through subprocess: exit codes, outputs, determinism."""

import csv
import json
import subprocess
import sys

import pytest

BASE_CONFIG = {
    "system": {"b0": 0.036, "nuclei": [{"a_par": 200e3, "a_perp": 100e3}]},
    "drive": {"eta_e": 5.0, "eta_r": 5.0, "c_e": 25.0, "c_r": 20e3},
    "sweep": {"bandwidth": 24e6, "omega_r": 100.0, "duration": 20.0},
    "grids": {"omega_r": [10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0]},
}


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "spinratchet.cli", *args],
        capture_output=True,
        text=True,
    )


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def test_profile_outputs_and_manifest(tmp_path):
    cfg = write_config(tmp_path, BASE_CONFIG)
    out = tmp_path / "out"
    proc = run_cli("profile", "--config", str(cfg), "--out", str(out), "--svg")
    assert proc.returncode == 0, proc.stderr
    rows = list(csv.DictReader((out / "analytic_profile.csv").open()))
    assert len(rows) == 6
    assert set(rows[0]) == {"omega_r_hz", "signal"}
    opt = json.loads((out / "omega_opt.json").read_text())
    assert 10.0 < opt["omega_opt_hz"] < 3000.0
    manifest = json.loads((out / "run_manifest.json").read_text())
    assert manifest["command"] == "profile"
    assert manifest["seed"] == 0
    assert "spinratchet" in manifest["versions"]
    assert "numpy" in manifest["versions"]
    assert manifest["wall_time_s"] >= 0
    svg = (out / "analytic_profile.svg").read_text()
    assert svg.startswith("<svg")


def test_missing_key_is_config_error(tmp_path):
    cfg = write_config(tmp_path, {"system": {"b0": 0.036}})
    proc = run_cli("profile", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert proc.returncode == 2
    assert "drive.eta_e" in proc.stderr


def test_malformed_json_is_config_error(tmp_path):
    cfg = tmp_path / "broken.json"
    cfg.write_text("{not json")
    proc = run_cli("profile", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert proc.returncode == 2


def test_profile_without_gaps_or_nuclei(tmp_path):
    cfg_data = dict(BASE_CONFIG, system={"b0": 0.036})
    cfg = write_config(tmp_path, cfg_data)
    proc = run_cli("profile", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert proc.returncode == 2
    assert "gaps" in proc.stderr

    cfg_data["gaps"] = {"eps1": 100e3, "eps2": 30e3}
    cfg = write_config(tmp_path, cfg_data, "with_gaps.json")
    proc = run_cli("profile", "--config", str(cfg), "--out", str(tmp_path / "out2"))
    assert proc.returncode == 0, proc.stderr


def test_rerun_is_byte_identical(tmp_path):
    cfg = write_config(tmp_path, BASE_CONFIG)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run_cli("profile", "--config", str(cfg), "--out", str(out1)).returncode == 0
    assert run_cli("profile", "--config", str(cfg), "--out", str(out2)).returncode == 0
    assert (out1 / "analytic_profile.csv").read_bytes() == (out2 / "analytic_profile.csv").read_bytes()
    assert (out1 / "omega_opt.json").read_bytes() == (out2 / "omega_opt.json").read_bytes()


def test_buildup_high_power_grows_faster(tmp_path):
    cfg_data = {
        "system": BASE_CONFIG["system"],
        "drive": {"eta_e": 5.0, "eta_r": 3.0, "c_e": 25.0, "c_r": 20e3},
        "sweep": {"bandwidth": 24e6, "omega_r": 3000.0, "duration": 2.0},
        "chain": {"kappa_d": 10.0},
        "grids": {"eta_e": [0.4, 20.8]},
    }
    cfg = write_config(tmp_path, cfg_data)
    out = tmp_path / "out"
    proc = run_cli("buildup", "--config", str(cfg), "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    rows = list(csv.DictReader((out / "injection_rates.csv").open()))
    assert len(rows) == 2
    low, high = (float(r["pb_slope_per_s"]) for r in rows)
    assert high > low
    trace = list(csv.DictReader((out / "buildup_e0.csv").open()))
    assert set(trace[0]) == {"t_s", "p_e", "p_p", "p_b"}


def test_validate_surfaces_warning_on_stderr(tmp_path):
    cfg_data = {
        "system": BASE_CONFIG["system"],
        "drive": {"eta_e": 1.0, "eta_r": 1.0, "c_e": 25.0, "c_r": 20e3},
        "sweep": {"bandwidth": 100e3, "omega_r": 10.0, "duration": 1.0},
    }
    cfg = write_config(tmp_path, cfg_data)
    out = tmp_path / "out"
    proc = run_cli("validate", "--config", str(cfg), "--out", str(out))
    assert proc.returncode == 0
    assert "PASS" in proc.stdout
    assert "warning" in proc.stderr
    report = json.loads((out / "validation.json").read_text())
    assert report["ok"] and report["warnings"]


def test_propagate_zero_tilt_plumbing(tmp_path):
    cfg_data = {
        "system": {"b0": 0.036, "nuclei": [{"a_par": 200e3, "a_perp": 0.0}]},
        "drive": {"eta_e": 1.0, "eta_r": 1.0, "c_e": 25.0, "c_r": 20e3},
        "sweep": {"bandwidth": 1e6, "omega_r": 1000.0, "duration": 0.002},
        "propagation": {"steps_per_sweep": 2500, "sweeps": 2, "initial_nuclear": "down"},
    }
    cfg = write_config(tmp_path, cfg_data)
    out = tmp_path / "out"
    proc = run_cli("propagate", "--config", str(cfg), "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    rows = list(csv.DictReader((out / "propagation.csv").open()))
    assert len(rows) == 2
    for row in rows:
        assert float(row["iz_expectation"]) == pytest.approx(-1.0, abs=1e-9)


def test_regimes_small_grid(tmp_path):
    cfg_data = {
        "system": BASE_CONFIG["system"],
        "drive": {"eta_e": 5.0, "eta_r": 1.0, "c_e": 25.0, "c_r": 20e3},
        "sweep": {"bandwidth": 24e6, "omega_r": 100.0, "duration": 20.0},
        "chain": {"kappa_d": "inf"},
        "grids": {
            "omega_r": [3.0, 10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0],
            "eta_e": [2.0, 10.0, 20.0],
            "eta_r": [1.0],
        },
    }
    cfg = write_config(tmp_path, cfg_data)
    out = tmp_path / "out"
    proc = run_cli("regimes", "--config", str(cfg), "--out", str(out), "--threads", "2")
    assert proc.returncode == 0, proc.stderr
    cells = sorted(p.name for p in (out / "cells").glob("*.csv"))
    assert cells == ["cell_r0_e0.csv", "cell_r0_e1.csv", "cell_r0_e2.csv"]
    slopes = list(csv.DictReader((out / "slopes.csv").open()))
    assert len(slopes) == 1
    assert float(slopes[0]["slope_hz_per_w"]) > 0
    summary = list(csv.DictReader((out / "summary_cells.csv").open()))
    assert len(summary) == 3
    manifest = json.loads((out / "run_manifest.json").read_text())
    assert manifest["failed_cells"] == []


def test_unknown_command_rejected():
    proc = run_cli("frobnicate", "--config", "x.json")
    assert proc.returncode == 2
