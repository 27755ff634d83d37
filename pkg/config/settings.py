"""
Django settings for the mdp_smd solver toolkit.

- No database: every artifact (instances, reports, CSV traces) is a file.
- Solver tunables live in the MDP_SMD dict and are read via mdp_smd.conf.
"""

import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

# ─────────────────────────────────────────────────────── security

SECRET_KEY = os.environ.get("DJANGO_SECRET_KEY", "dev-secret-do-not-use-in-production")
DEBUG = os.environ.get("DJANGO_DEBUG", "false").lower() == "true"
ALLOWED_HOSTS: list[str] = []

# ─────────────────────────────────────────────────────── apps

INSTALLED_APPS = [
    "mdp_smd.apps.MdpSmdConfig",
]

# ─────────────────────────────────────────────────────── database
# Nothing is persisted through the ORM.

DATABASES: dict = {}

# ─────────────────────────────────────────────────────── i18n

LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# ─────────────────────────────────────────────────────── solver

MDP_SMD = {
    # Worker cap for sweeps; MDP_SMD_THREADS overrides.
    "THREADS": None,
    # "body" → (4, 16, 8) step / horizon constants, "appendix" → (8, 32, 16)
    "SCHEDULE_CONSTANTS": os.environ.get("MDP_SMD_SCHEDULE_CONSTANTS", "body"),
    "CHECKPOINTS": 16,
    # "lazy" (timestamped flushes) or "dense" (reference averaging)
    "ACCUMULATOR": "lazy",
    # "sumtree" or "linear" (linear scan is the correctness oracle)
    "SAMPLER": "sumtree",
    "SUMTREE_REBUILD_EVERY": 2**20,
    # Exact-oracle size limits
    "ORACLE_MAX_STATES": 8,
    "ORACLE_MAX_POLICIES": 100_000,
    "POLICY_ITERATION_MAX_STATES": 200,
    "MIXING_TIME_MAX_STEPS": 10_000,
    # Rejection-sampling budget for constrained instances
    "FEASIBILITY_ATTEMPTS": 100,
}

# ─────────────────────────────────────────────────────── logging

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "loggers": {
        "mdp_smd": {
            "handlers": ["console"],
            "level": os.environ.get("MDP_SMD_LOG_LEVEL", "WARNING"),
            "propagate": True,
        },
    },
}
