import math

import numpy as np
import pytest

import markovlens as ml

P0 = np.diag([0.0, 1.0]).astype(complex)


def clipped_damping():
    return ml.amplitude_damping(ml.ScalarSignal.cosine_clipped(1.0, math.pi / 2), 3.0)


def test_natural_matrix_acts_by_column_stacking():
    f = clipped_damping()
    rho = np.array([[0.3, 0.2 + 0.1j], [0.2 - 0.1j, 0.7]])
    n = f.natural(0.5)
    out = (n @ rho.reshape(-1, order="F")).reshape(2, 2, order="F")
    assert np.allclose(out, f.apply(0.5, rho))
    g = math.cos(0.5)
    assert out[0, 0] == pytest.approx(g * g * 0.3)


def test_choi_round_trip():
    rng = np.random.default_rng(0)
    n = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    assert np.allclose(ml.from_choi(ml.to_choi(n)), n, atol=1e-12)


def test_trace_norm_matches_numpy():
    rng = np.random.default_rng(1)
    for _ in range(20):
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h = (g + g.conj().T) / 2
        assert ml.trace_norm(h) == pytest.approx(np.abs(np.linalg.eigvalsh(h)).sum(), rel=1e-12)


def test_verdict_and_projector():
    f = clipped_damping()
    v = ml.verdict(f, ml.uniform_grid(3.0))
    assert v["status"] == "CP_DIVISIBLE"
    assert v["breakpoints"][0] == pytest.approx(math.pi / 2, abs=1e-6)
    lp = ml.limit_projector(f, math.pi / 2)
    expect = np.zeros((4, 4), dtype=complex)
    # X -> P0 Tr X: vec(P0) vec(I)^T.
    expect[3, 0] = expect[3, 3] = 1.0
    assert np.abs(lp["natural"] - expect).max() < 1e-6


def test_rank_profile():
    p = ml.rank_profile(clipped_damping(), ml.uniform_grid(3.0, 100))
    assert p["ranks"][0] == 4 and p["ranks"][-1] == 1
    assert len(p["breakpoints"]) == 1


def test_witness_scan_is_seeded():
    f = ml.amplitude_damping_rates(ml.ScalarSignal.sinusoidal(1.0, 1.0), t_max=7.0)
    grid = ml.uniform_grid(7.0)
    a = ml.witness_scan(f, grid, n_samples=8, n_refine=2, seed=4)
    b = ml.witness_scan(f, grid, n_samples=8, n_refine=2, seed=4, threads=2)
    assert a == b
    assert a["max_backflow"] > 1e-3
    assert math.pi < a["max_backflow_time"] < 2 * math.pi


def test_extend_cp_on_ground_state_span():
    r = ml.extend_cp([P0], [P0])
    assert r["status"] == "FEASIBLE"
    assert r["verified"]
    c = r["choi"]
    assert np.linalg.eigvalsh(c).min() > -1e-9


def test_equilibrium_relaxation_from_config():
    f = ml.family_from_config(
        {
            "family": {
                "preset": "equilibrium_relaxation",
                "params": {"F": {"type": "piecewise_linear", "knots": [[0, 0], [1, 1]]}, "omega_seed": 3},
            },
            "grid": {"t_max": 2.0},
        }
    )
    assert f.dim == 2
    assert ml.verdict(f, ml.uniform_grid(2.0))["status"] == "CP_DIVISIBLE"


def test_errors_map_to_python_exceptions():
    with pytest.raises(ml.ConfigError, match="valid presets"):
        ml.family_from_config({"family": {"preset": "nope"}, "grid": {"t_max": 1.0}})
    with pytest.raises(ml.MarkovlensError):
        c = ml.ScalarSignal.constant
        ml.pauli_lambda(c(2.0), c(1.0), c(1.0), 1.0)
    with pytest.raises(ValueError):
        ml.family_from_config({"family": {"preset": "identity"}, "grid": {"t_max": -1.0}})


def test_analyze_and_report(tmp_path):
    cfg = {
        "family": {"preset": "amplitude_damping", "params": {"G": {"type": "exp_decay", "rate": 0.5}}},
        "grid": {"t_max": 2.0, "n_points": 50},
        "tasks": ["verdict", "blp"],
        "output": str(tmp_path),
    }
    paths = ml.analyze(cfg)
    assert {p.split("/")[-1] for p in paths} == {"verdict.json", "rank_profile.csv", "blp.csv", "blp.json"}
    assert "CP_DIVISIBLE" in ml.report(str(tmp_path))
