"""Python bindings for the parcap library."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import run_experiment as _run_experiment


def run(config):
    """Run an experiment given as a dict; returns (summary dict, pass flag)."""
    summary, ok = _run_experiment(_json.dumps(config))
    return _json.loads(summary), ok
