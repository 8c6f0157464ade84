"""Coupled cubic Schrodinger systems: thin wrapper over the C++ core.

Component indices are zero based here; reports and configs use one-based
indices.
"""

import json

from ._cnls import (  # noqa: F401
    ConfigError,
    InvalidInput,
    System,
    beta_bar,
    classify,
    d_tilde,
    decay,
    ground_state,
    optimal_decompositions,
    predict,
    scalar_soliton,
)
from ._cnls import run_config as _run_config


def run_config(text, seed=12345, jobs=1):
    """Run a JSON scenario config; returns (report dict, exit code)."""
    report, code = _run_config(text, seed, jobs)
    return json.loads(report), code
