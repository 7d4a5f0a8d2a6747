"""Divisibility, information backflow and CP extension of quantum dynamical maps."""

import json as _json
import os as _os

from ._core import (
    ConfigError,
    MapFamily,
    MarkovlensError,
    ScalarSignal,
    Tolerances,
    amplitude_damping,
    amplitude_damping_rates,
    equilibrium_relaxation,
    extend_cp,
    from_choi,
    limit_projector,
    pauli_lambda,
    pauli_rates,
    rank_profile,
    report,
    to_choi,
    trace_norm,
)
from . import _core

__all__ = [
    "ConfigError",
    "MapFamily",
    "MarkovlensError",
    "ScalarSignal",
    "Tolerances",
    "amplitude_damping",
    "amplitude_damping_rates",
    "analyze",
    "equilibrium_relaxation",
    "extend_cp",
    "family_from_config",
    "from_choi",
    "limit_projector",
    "pauli_lambda",
    "pauli_rates",
    "rank_profile",
    "report",
    "to_choi",
    "trace_norm",
    "uniform_grid",
    "verdict",
    "witness_scan",
]


def uniform_grid(t_max, n_points=400):
    """Equally spaced times on [0, t_max], endpoints included."""
    step = t_max / (n_points - 1)
    return [i * step for i in range(n_points - 1)] + [float(t_max)]


def family_from_config(config):
    """Build a map family from a config dict (same schema as the CLI)."""
    return _core.family_from_config(_json.dumps(config))


def verdict(family, times, tolerances=None):
    """CP-divisibility verdict as a dict (verdict.json layout)."""
    return _json.loads(_core._verdict_json(family, list(times), tolerances or Tolerances()))


def witness_scan(family, times, ancilla_kind="d", n_samples=64, n_refine=16, seed=0, threads=1):
    """Randomized backflow witness search; returns the best record as a dict."""
    return _json.loads(
        _core._witness_scan_json(family, list(times), ancilla_kind, n_samples, n_refine, seed, threads)
    )


def analyze(config, threads=1):
    """Run the tasks of a config dict and return the written paths."""
    return [_os.fspath(p) for p in _core._analyze(_json.dumps(config), threads)]
