"""Directed cycle analysis and resonance-free band verification for
two-level semiclassical Schrodinger systems on the line.

Thin convenience layer over the compiled `_core` module: configs go in as
dicts (or JSON strings), reports come back as dicts.
"""

import json as _json

from ._core import __version__, config_hash as _config_hash
from ._core import canonical_config as _canonical_config
from ._core import report as _report
from ._core import run as _run

__all__ = [
    "analyze",
    "amplitude",
    "candidates",
    "resonances",
    "verify",
    "run",
    "canonical_config",
    "config_hash",
    "__version__",
]


def _dumps(config):
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def analyze(config):
    """Phase graph, cycles and band data for a problem config."""
    return _json.loads(_report("analyze", _dumps(config)))


def amplitude(config):
    """Cycle amplitude grids and bound checks over the configured h list."""
    return _json.loads(_report("amplitude", _dumps(config)))


def candidates(config):
    """Quantization roots and contour winding counts per h."""
    return _json.loads(_report("candidates", _dumps(config)))


def resonances(config, jobs=1):
    """Complex-dilated spectra with eigenvalue classification per h."""
    return _json.loads(_report("resonances", _dumps(config), jobs))


def verify(config, jobs=1):
    """Resonance-free band check; `report["band_empty"]` is the verdict."""
    return _json.loads(_report("verify", _dumps(config), jobs))


def run(subcommand, config, out_dir="", jobs=1):
    """Full pipeline run with on-disk artifacts.

    Returns {"exit_code", "report", "output_path"}; exit codes follow the
    CLI convention (0 ok, 1 hypothesis failure, 2 invalid input,
    3 verification failed).
    """
    code, report, path = _run(subcommand, _dumps(config), out_dir, jobs)
    return {"exit_code": code, "report": _json.loads(report), "output_path": path}


def canonical_config(config):
    """Validated config rewritten with all defaults materialized."""
    return _json.loads(_canonical_config(_dumps(config)))


def config_hash(config):
    """Stable 16-hex-digit hash of the canonical config."""
    return _config_hash(_dumps(config))
