"""
mdp_smd.conf
~~~~~~~~~~~~
Solver configuration.

Configuration is pulled from Django settings (or env vars as override):

    MDP_SMD = {
        "THREADS": None,                 # sweep worker cap (None → CPU count)
        "SCHEDULE_CONSTANTS": "body",    # or "appendix"
        "CHECKPOINTS": 16,
        "ACCUMULATOR": "lazy",           # or "dense"
        "SAMPLER": "sumtree",            # or "linear"
        "SUMTREE_REBUILD_EVERY": 2**20,
        "ORACLE_MAX_STATES": 8,
        "ORACLE_MAX_POLICIES": 100_000,
        "POLICY_ITERATION_MAX_STATES": 200,
        "MIXING_TIME_MAX_STEPS": 10_000,
        "FEASIBILITY_ATTEMPTS": 100,
    }
"""

from __future__ import annotations

import os
from typing import Any, Dict

from .exceptions import ConfigError

DEFAULTS: Dict[str, Any] = {
    "THREADS": None,
    "SCHEDULE_CONSTANTS": "body",
    "CHECKPOINTS": 16,
    "ACCUMULATOR": "lazy",
    "SAMPLER": "sumtree",
    "SUMTREE_REBUILD_EVERY": 2**20,
    "ORACLE_MAX_STATES": 8,
    "ORACLE_MAX_POLICIES": 100_000,
    "POLICY_ITERATION_MAX_STATES": 200,
    "MIXING_TIME_MAX_STEPS": 10_000,
    "FEASIBILITY_ATTEMPTS": 100,
}

_CHOICES = {
    "SCHEDULE_CONSTANTS": ("body", "appendix"),
    "ACCUMULATOR": ("lazy", "dense"),
    "SAMPLER": ("sumtree", "linear"),
}


def _get_django_config() -> Dict[str, Any]:
    try:
        from django.conf import settings
        return getattr(settings, "MDP_SMD", {})
    except Exception:
        return {}


def get_config() -> Dict[str, Any]:
    """Return the effective configuration as a lower-case keyed dict."""
    cfg = dict(DEFAULTS)
    cfg.update(_get_django_config())

    # Priority: env var > Django settings > defaults.
    if os.environ.get("MDP_SMD_THREADS"):
        try:
            cfg["THREADS"] = int(os.environ["MDP_SMD_THREADS"])
        except ValueError:
            raise ConfigError(
                f"MDP_SMD_THREADS must be an integer, got {os.environ['MDP_SMD_THREADS']!r}"
            )
    if os.environ.get("MDP_SMD_SCHEDULE_CONSTANTS"):
        cfg["SCHEDULE_CONSTANTS"] = os.environ["MDP_SMD_SCHEDULE_CONSTANTS"]

    if cfg["THREADS"] is None:
        cfg["THREADS"] = os.cpu_count() or 1

    for key, allowed in _CHOICES.items():
        if cfg[key] not in allowed:
            raise ConfigError(f"MDP_SMD[{key!r}] must be one of {allowed}, got {cfg[key]!r}")
    for key in (
        "THREADS",
        "CHECKPOINTS",
        "SUMTREE_REBUILD_EVERY",
        "ORACLE_MAX_STATES",
        "ORACLE_MAX_POLICIES",
        "POLICY_ITERATION_MAX_STATES",
        "MIXING_TIME_MAX_STEPS",
        "FEASIBILITY_ATTEMPTS",
    ):
        if int(cfg[key]) < 1:
            raise ConfigError(f"MDP_SMD[{key!r}] must be a positive integer, got {cfg[key]!r}")

    return {key.lower(): value for key, value in cfg.items()}
