"""Python front end for the robust_t core.

Reports come back from the native module as JSON and are decoded into plain
dicts here.
"""

import json

from . import _core
from ._core import Error, HypothesisError, class_params, cos_angle, op_norm, s_constants, schatten_M, threshold

__all__ = [
    "Error",
    "HypothesisError",
    "angle_report",
    "class_params",
    "cos_angle",
    "criterion",
    "expander",
    "group",
    "iterate",
    "op_norm",
    "run_cli",
    "s_constants",
    "schatten_M",
    "threshold",
]


def group(kind, q=3, n=3):
    return json.loads(_core.group_json(kind, q, n))


def angle_report(kind, k1, k2, q=3, n=3, r=(2.0, 3.0, 4.0)):
    return json.loads(_core.angle_report_json(kind, q, n, list(k1), list(k2), list(r)))


def criterion(scheme=None, steinberg=None, epsilon=None, c_prime=None):
    """Evaluate a scheme dict, or the Steinberg layout given as (n, m, q)."""
    if (scheme is None) == (steinberg is None):
        raise ValueError("pass exactly one of scheme or steinberg")
    if steinberg is not None:
        n, m, q = steinberg
        return json.loads(_core.criterion_steinberg_json(n, m, q, epsilon, c_prime))
    return json.loads(_core.criterion_scheme_json(json.dumps(scheme), epsilon, c_prime))


def iterate(family, check_n=60, seed=0):
    return json.loads(_core.iterate_json(json.dumps(family), check_n, seed))


def expander(n, q, k, p_values=(), seed=0, restarts=32):
    return json.loads(_core.expander_json(n, q, k, list(p_values), seed, restarts))


def run_cli(*args):
    """Run the command-line front end in-process; returns (status, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
