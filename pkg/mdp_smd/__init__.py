"""
mdp_smd: stochastic mirror descent solvers for MDPs and ℓ∞-ℓ1 games.

The package solves bilinear saddle-point problems over a box and a simplex
with sampled gradients, and instantiates them for

  - mixing average-reward MDPs and discounted MDPs,
  - average-reward MDPs with occupancy constraints Dᵀμ ≥ 1,
  - box-simplex matrix games and ℓ∞ regression,

together with exact small-instance oracles (policy evaluation, optimal
policies, mixing times, closed-form duality gaps) that certify every run.

Usage::

    python manage.py generate --kind random_mixing --S 5 --actions 3 --alpha 0.3 --seed 7 -o inst.json
    python manage.py solve inst.json --task amdp --eps 0.15 --seed 1 --report report.json --csv trace.csv
    python manage.py verify --builtin
"""

__version__ = "0.1.0"

from .exceptions import (
    ConfigError,
    DomainError,
    EmptyDistribution,
    InfeasibleInstance,
    InstanceFormatError,
    MdpSmdError,
    NonFiniteIterate,
    NonUniqueStationary,
    NotMixing,
    OracleTooLarge,
    SingularMatrix,
    StepBoundViolation,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "EmptyDistribution",
    "InfeasibleInstance",
    "InstanceFormatError",
    "MdpSmdError",
    "NonFiniteIterate",
    "NonUniqueStationary",
    "NotMixing",
    "OracleTooLarge",
    "SingularMatrix",
    "StepBoundViolation",
]
