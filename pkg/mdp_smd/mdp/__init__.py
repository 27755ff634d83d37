"""
mdp_smd.mdp
~~~~~~~~~~~
MDP instances, generative-model access, generators and exact oracles.
"""

from .generators import generate_instance, normalize_costs
from .instance import GenerativeModel, MdpInstance, Policy, generative_sample
from .oracles import (
    DISCOUNTED,
    MIXING,
    NormBoundReport,
    OptimalSolution,
    PolicyEvaluation,
    PowerDecayReport,
    chain_mixing_time,
    evaluate_policy,
    evaluation_report,
    feasibility_margin,
    induced_chain,
    mixing_time,
    occupancy,
    optimal_oracle,
    power_decay_check,
    stationary_distribution,
    verify_norm_bounds,
)

__all__ = [
    "DISCOUNTED",
    "GenerativeModel",
    "MIXING",
    "MdpInstance",
    "NormBoundReport",
    "OptimalSolution",
    "Policy",
    "PolicyEvaluation",
    "PowerDecayReport",
    "chain_mixing_time",
    "evaluate_policy",
    "evaluation_report",
    "feasibility_margin",
    "generate_instance",
    "generative_sample",
    "induced_chain",
    "mixing_time",
    "normalize_costs",
    "occupancy",
    "optimal_oracle",
    "power_decay_check",
    "stationary_distribution",
    "verify_norm_bounds",
]
