import csv
import json
import math
import os
import subprocess

import pytest


def run(cli, *args, env=None):
    e = dict(os.environ)
    e.update(env or {})
    return subprocess.run([cli, *args], capture_output=True, text=True, env=e)


def write_config(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_analyze_exp_decay(cli, tmp_path):
    cfg = {
        "family": {"preset": "amplitude_damping", "params": {"G": {"type": "exp_decay", "rate": 0.5}}},
        "grid": {"t_max": 3.0},
        "tasks": ["verdict"],
    }
    r = run(cli, "analyze", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path / "o"))
    assert r.returncode == 0, r.stderr
    assert json.loads((tmp_path / "o" / "verdict.json").read_text())["status"] == "CP_DIVISIBLE"


def test_analyze_clipped_rates(cli, repo_root, tmp_path):
    out = tmp_path / "o"
    r = run(cli, "analyze", "--config", str(repo_root / "configs" / "ad_clipped.json"), "--out", str(out))
    assert r.returncode == 0, r.stderr
    assert json.loads((out / "verdict.json").read_text())["status"] == "CP_DIVISIBLE"
    rows = list(csv.DictReader((out / "rates.csv").open()))
    for row in rows:
        t = float(row["t"])
        if 0.1 <= t <= 1.4:
            assert row["status"] == "ok"
            assert float(row["gamma_1"]) == pytest.approx(2 * math.tan(t), abs=1e-4)
        if t >= math.pi / 2:
            assert row["status"] == "singular"
            assert row["gamma_1"] == ""


def test_unknown_preset_exits_2(cli, tmp_path):
    cfg = {"family": {"preset": "lindblad"}, "grid": {"t_max": 1.0}}
    r = run(cli, "analyze", "--config", write_config(tmp_path, cfg))
    assert r.returncode == 2
    for name in ["amplitude_damping", "pauli_lambda", "equilibrium_relaxation"]:
        assert name in r.stderr


def test_unknown_key_and_bad_flags_exit_2(cli, tmp_path):
    cfg = {"family": {"preset": "identity"}, "grid": {"t_max": 1.0}, "colour": "blue"}
    assert run(cli, "analyze", "--config", write_config(tmp_path, cfg)).returncode == 2
    assert run(cli, "analyze").returncode == 2
    assert run(cli, "frobnicate").returncode == 2
    assert run(cli, "analyze", "--config", str(tmp_path / "missing.json")).returncode == 2


def test_numerical_failure_exits_3(cli, tmp_path):
    # The decay rate diverges at t = 0.5.
    cfg = {
        "family": {"preset": "gkls", "params": {"hamiltonian": [[0, 0], [0, 0]],
                   "jumps": [{"op": [[0, 0], [1, 0]], "rate": {"type": "inverse_gap", "t1": 0.5}}]}},
        "grid": {"t_max": 1.0, "n_points": 20},
    }
    r = run(cli, "analyze", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path / "o"))
    assert r.returncode == 3
    assert "integrate_generator" in r.stderr and "at t=" in r.stderr


def test_witness_scan_sin_rate(cli, repo_root, tmp_path):
    out = tmp_path / "w"
    r = run(cli, "witness-scan", "--config", str(repo_root / "configs" / "ad_sin_rate.json"),
            "--out", str(out), "--seed", "5")
    assert r.returncode == 0, r.stderr
    best = json.loads((out / "best_witness.json").read_text())
    assert best["max_backflow"] > 1e-3
    assert best["seed"] == 5
    assert (out / "witness_trajectory.csv").exists()
    assert not (out / "verdict.json").exists()


def test_extend_equilibrium(cli, repo_root, tmp_path):
    out = tmp_path / "e"
    r = run(cli, "extend", "--config", str(repo_root / "configs" / "equilibrium.json"), "--out", str(out))
    assert r.returncode == 0, r.stderr
    feas = json.loads((out / "feasibility.json").read_text())
    assert feas["status"] == "FEASIBLE"
    assert feas["verification"]["passes"]
    choi = json.loads((out / "choi.json").read_text())
    assert len(choi["choi"]) == 4


def test_report(cli, repo_root, tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert run(cli, "report", "--in", str(empty)).returncode == 2
    out = tmp_path / "o"
    assert run(cli, "analyze", "--config", str(repo_root / "configs" / "ad_exp.json"),
               "--out", str(out)).returncode == 0
    r = run(cli, "report", "--in", str(out))
    assert r.returncode == 0
    assert "CP_DIVISIBLE" in r.stdout
    assert "rank_profile.csv" in r.stdout


def test_log_level(cli, repo_root, tmp_path):
    args = ["analyze", "--config", str(repo_root / "configs" / "ad_exp.json"), "--out", str(tmp_path / "o")]
    quiet = run(cli, *args)
    loud = run(cli, *args, env={"MARKOVLENS_LOG": "info"})
    assert quiet.stderr == ""
    assert "wrote" in loud.stderr


def test_csv_floats_round_trip(cli, repo_root, tmp_path):
    out = tmp_path / "o"
    run(cli, "analyze", "--config", str(repo_root / "configs" / "ad_exp.json"), "--out", str(out))
    header, *rows = (out / "rank_profile.csv").read_text().splitlines()
    assert header.startswith("t,sv_1,")
    for cell in rows[5].split(",")[:-2]:
        assert repr(float(cell)) == repr(float(repr(float(cell))))
        assert float(cell) == float(f"{float(cell):.17g}")
