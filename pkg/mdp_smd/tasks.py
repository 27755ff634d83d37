"""
mdp_smd.tasks
~~~~~~~~~~~~~
Task dispatch shared by ``manage.py solve`` and ``manage.py sweep``.

    amdp        mixing average-reward MDP          solve_mdp(mode="mixing")
    dmdp        discounted MDP                     solve_mdp(mode="discounted")
    camdp       constrained average-reward MDP     solve_constrained
    game        box-simplex matrix game            solve_game
    regression  ℓ∞ regression (game file: M, c)    linf_regression
"""

from __future__ import annotations

import logging
from typing import Any, Optional, Union

import numpy as np

from .exceptions import ConfigError
from .framework import SolveReport
from .mdp import MdpInstance
from .mdp.oracles import DISCOUNTED, MIXING
from .solvers.constrained import solve_constrained
from .solvers.game import GameInstance, linf_regression, solve_game
from .solvers.mdp import solve_mdp

logger = logging.getLogger("mdp_smd.tasks")

TASKS = ("amdp", "dmdp", "camdp", "game", "regression")
MDP_TASKS = ("amdp", "dmdp", "camdp")

Instance = Union[MdpInstance, GameInstance]


def check_task(task: str) -> str:
    if task not in TASKS:
        raise ConfigError(f"task must be one of {TASKS}, got {task!r}")
    return task


def load_instance(task: str, path) -> Instance:
    if check_task(task) in MDP_TASKS:
        return MdpInstance.load(path)
    return GameInstance.load(path)


def run_task(
    task: str,
    instance: Instance,
    eps: float,
    seed: int,
    *,
    iterations: Optional[int] = None,
    accumulator: Optional[str] = None,
    t_mix: Optional[int] = None,
    **options: Any,
) -> SolveReport:
    check_task(task)
    common = dict(iterations=iterations, accumulator=accumulator, **options)
    if task in MDP_TASKS and not isinstance(instance, MdpInstance):
        raise ConfigError(f"task {task!r} needs an MDP instance")
    if task == "amdp":
        report, _ = solve_mdp(instance, eps, seed, MIXING, t_mix=t_mix, **common)
    elif task == "dmdp":
        report, _ = solve_mdp(instance, eps, seed, DISCOUNTED, **common)
    elif task == "camdp":
        report, _ = solve_constrained(instance, eps, seed, t_mix=t_mix, **common)
    elif not isinstance(instance, GameInstance):
        raise ConfigError(f"task {task!r} needs a game instance")
    elif task == "game":
        report = solve_game(instance, eps, seed, **common)
    else:
        report, _, _ = linf_regression(instance.M, instance.c, eps, seed, **common)
    report.extra.setdefault("task", task)
    return report


def samples_to_target(report: SolveReport, eps: float) -> Optional[int]:
    """Samples at the first checkpoint whose suboptimality (or gap) is ≤ eps."""
    for checkpoint in report.checkpoints:
        metric = checkpoint.subopt if checkpoint.subopt is not None else checkpoint.gap
        if metric <= eps:
            return checkpoint.samples
    return None


def median(values) -> Optional[float]:
    values = [v for v in values if v is not None]
    return float(np.median(values)) if values else None
