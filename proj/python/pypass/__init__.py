"""Prior adaptive semi-supervised (PASS) phenotyping estimators.

Thin Python layer over the compiled ``_core`` extension.
"""

import json

from ._core import (  # noqa: F401
    ConfigError,
    DataError,
    SolverError,
    auc,
    bss,
    excess_risk,
    fit_alpha,
    fit_method,
    fit_pass,
    fit_weighted_l1,
    make_folds,
    mse_p,
    simulate,
    tune_pass,
)
from ._core import bench as _bench

__all__ = [
    "ConfigError",
    "DataError",
    "SolverError",
    "auc",
    "bench",
    "bss",
    "excess_risk",
    "fit_alpha",
    "fit_method",
    "fit_pass",
    "fit_weighted_l1",
    "make_folds",
    "mse_p",
    "simulate",
    "tune_pass",
]


def bench(config):
    """Run a benchmark. ``config`` is a dict using the CLI config keys."""
    out = _bench(json.dumps(config))
    out["summary"] = json.loads(out.pop("summary_json"))
    return out
