"""Quantitative div-curl estimates for first-order elliptic systems.

Thin convenience layer over the compiled core: systems, periodic grids,
spectral operators, the Hodge splitting, norms, witness pairs with their
certificates, and the named ratio experiments.
"""

import json as _json

from ._core import (
    ConstraintError,
    DegenerateTrial,
    DimensionError,
    Grid,
    HypothesisError,
    IoError,
    System,
    bmo_norm,
    certify_ellipticity,
    curl_L,
    div_Lstar,
    dot,
    grad_L,
    grad_plain,
    grand_maximal,
    h1_norm,
    hodge_decompose,
    lp_norm,
    random_scalar_field,
    random_vector_field,
    read_cvf,
    rescaled_witness_pair,
    witness_pair,
    write_cvf,
)
from ._core import default_experiment_config_json as _default_config_json
from ._core import run_experiment_json as _run_experiment_json

__all__ = [
    "ConstraintError",
    "DegenerateTrial",
    "DimensionError",
    "Grid",
    "HypothesisError",
    "IoError",
    "System",
    "bmo_norm",
    "certify_ellipticity",
    "curl_L",
    "default_experiment_config",
    "div_Lstar",
    "dot",
    "grad_L",
    "grad_plain",
    "grand_maximal",
    "h1_norm",
    "hodge_decompose",
    "lp_norm",
    "random_scalar_field",
    "random_vector_field",
    "read_cvf",
    "rescaled_witness_pair",
    "run_experiment",
    "witness_pair",
    "write_cvf",
]


def default_experiment_config(name):
    """Resolved default config for a named experiment, as a dict."""
    return _json.loads(_default_config_json(name))


def run_experiment(config, threads=1):
    """Run a named experiment from a config dict; returns the report dict.

    `config` needs at least {"experiment": name}; remaining keys override the
    defaults from `default_experiment_config(name)`.
    """
    if isinstance(config, str):
        config = {"experiment": config}
    return _json.loads(_run_experiment_json(_json.dumps(config), threads))
