"""Ellipsoid mean-value expansion, DPP grid solver and noisy Tug-of-War games."""

import json as _json

from ._elliptow import (
    Branch,
    Domain,
    ElliptowError,
    Params,
    TestFunction,
    default_gamma,
    ellipsoid_map,
    expansion_residual,
    feasible_gamma_interval,
    game_step,
    make_params,
    make_params_default,
    minmax_average,
    p_laplacian,
    sampling_ellipsoid,
    scaled_distance,
)
from ._elliptow import describe_params as _describe_params
from ._elliptow import run_job as _run_job

__all__ = [
    "Branch",
    "Domain",
    "ElliptowError",
    "Params",
    "TestFunction",
    "default_gamma",
    "describe_params",
    "ellipsoid_map",
    "expansion_residual",
    "feasible_gamma_interval",
    "game_step",
    "make_params",
    "make_params_default",
    "make_test_function",
    "minmax_average",
    "p_laplacian",
    "run_job",
    "sampling_ellipsoid",
    "scaled_distance",
]


def run_job(kind, config, seed=None):
    """Run an experiment; returns (manifest: dict, csv_files: dict, all_passed: bool)."""
    manifest, csv, ok = _run_job(kind, _json.dumps(config), seed)
    return _json.loads(manifest), dict(csv), ok


def describe_params(n, p, gamma=None, branch=None):
    return _json.loads(_describe_params(n, p, gamma, branch))


def make_test_function(spec, dim):
    return TestFunction(_json.dumps(spec), dim)
