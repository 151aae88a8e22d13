"""Rank-k random perturbations of hyperbolic toral automorphisms."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import __version__, run_subcommand as _run_subcommand


def run(name, config, workers=1):
    """Run a CLI subcommand on a config dict (or JSON string); returns {file name: content}."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _run_subcommand(name, config, workers)
