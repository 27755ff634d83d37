"""
mdp_smd.framework
~~~~~~~~~~~~~~~~~
Generic stochastic mirror descent for ℓ∞-ℓ1 saddle-point problems.
"""

from .accumulator import IterateAccumulator
from .estimators import (
    BoundedEstimator,
    EstimatorBounds,
    NormKind,
    SampleCounter,
    SmdState,
    SparseGradient,
)
from .loop import run_smd
from .problem import BilinearProblem, SaddleProblem, exact_gap, vertex_gap
from .report import Checkpoint, SolveReport
from .schedule import (
    APPENDIX,
    BODY,
    ScheduleConstants,
    SmdSchedule,
    block_schedule,
    check_eps,
    checkpoint_times,
    constants_for,
    schedule_for,
)

__all__ = [
    "APPENDIX",
    "BODY",
    "BilinearProblem",
    "BoundedEstimator",
    "Checkpoint",
    "EstimatorBounds",
    "IterateAccumulator",
    "NormKind",
    "SaddleProblem",
    "SampleCounter",
    "ScheduleConstants",
    "SmdSchedule",
    "SmdState",
    "SolveReport",
    "SparseGradient",
    "block_schedule",
    "check_eps",
    "checkpoint_times",
    "constants_for",
    "exact_gap",
    "run_smd",
    "schedule_for",
    "vertex_gap",
]
