"""
mdp_smd.management.base
~~~~~~~~~~~~~~~~~~~~~~~
Shared plumbing for the management commands.

Exit codes::

    0  success
    1  verification failure
    2  usage or configuration error (bad params, unreadable instance, infeasible request)
    3  numeric failure (non-finite iterate, step guard, singular system)
"""

from __future__ import annotations

import json
from contextlib import contextmanager
from typing import Any, Iterator, List

from django.core.management.base import BaseCommand, CommandError

from ..exceptions import (
    EmptyDistribution,
    MdpSmdError,
    NonFiniteIterate,
    NonUniqueStationary,
    SingularMatrix,
    StepBoundViolation,
)

EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_NUMERIC = (NonFiniteIterate, StepBoundViolation, SingularMatrix, NonUniqueStationary, EmptyDistribution)


@contextmanager
def command_errors() -> Iterator[None]:
    """Translate solver errors into CommandError with the matching exit code."""
    try:
        yield
    except _NUMERIC as exc:
        raise CommandError(f"{type(exc).__name__}: {exc}", returncode=EXIT_NUMERIC)
    except (MdpSmdError, ValueError) as exc:
        raise CommandError(f"{type(exc).__name__}: {exc}", returncode=EXIT_CONFIG)


def float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise CommandError(f"expected comma-separated numbers, got {text!r}", returncode=EXIT_CONFIG)


def int_list(text: str) -> List[int]:
    """``"0-9"`` or ``"1,4,7"``."""
    try:
        if "-" in text and "," not in text:
            lo, hi = text.split("-", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise CommandError(f"expected a range like 0-9 or comma-separated integers, got {text!r}", returncode=EXIT_CONFIG)


class SolverCommand(BaseCommand):
    """BaseCommand with a ``--json`` switch."""

    def add_arguments(self, parser):
        parser.add_argument(
            "--json",
            action="store_true",
            default=False,
            help="Print machine-readable JSON instead of a human summary.",
        )

    def emit_json(self, data: Any) -> None:
        self.stdout.write(json.dumps(data, indent=2))
