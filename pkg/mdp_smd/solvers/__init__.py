"""
mdp_smd.solvers
~~~~~~~~~~~~~~~
Instantiations of the mirror descent framework.
"""

from .constrained import (
    ConstrainedConfig,
    ConstrainedProblem,
    constrained_saddle_oracle,
    exact_constrained_gap,
    solve_constrained,
    violation_metrics,
)
from .game import (
    GameInstance,
    estimator_x_game,
    estimator_y_game,
    linf_regression,
    regression_certificate,
    solve_game,
    solve_linf_regression,
)
from .mdp import (
    MdpSaddleConfig,
    MuDiscounted,
    MuMixing,
    VDiscounted,
    VMixing,
    exact_mdp_gap,
    mdp_problem,
    round_to_policy,
    saddle_config,
    solve_mdp,
)

__all__ = [
    "ConstrainedConfig",
    "ConstrainedProblem",
    "GameInstance",
    "MdpSaddleConfig",
    "MuDiscounted",
    "MuMixing",
    "VDiscounted",
    "VMixing",
    "constrained_saddle_oracle",
    "estimator_x_game",
    "estimator_y_game",
    "exact_constrained_gap",
    "exact_mdp_gap",
    "linf_regression",
    "mdp_problem",
    "regression_certificate",
    "round_to_policy",
    "saddle_config",
    "solve_constrained",
    "solve_game",
    "solve_linf_regression",
    "violation_metrics",
]
