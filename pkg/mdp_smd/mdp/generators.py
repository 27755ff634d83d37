"""
mdp_smd.mdp.generators
~~~~~~~~~~~~~~~~~~~~~~
Seeded random instances.

    random_mixing   average-reward instance, t_mix recorded when the oracle can enumerate
    random_dmdp     discounted instance with uniform q
    constrained     random_mixing plus a normalised constraint matrix D

Transition rows are Dirichlet(1, …, 1) draws mixed with the uniform row,
``row ← (1 − α)·row + α/S``; α > 0 keeps every chain aperiodic and
irreducible.

Params::

    {"S": 5, "actions": 3 | [A_1, …, A_S], "alpha": 0.3,
     "gamma": 0.9, "K": 2, "D_max": 1.0}
"""

from __future__ import annotations

import logging
from typing import Any, Mapping, Sequence, Union

import numpy as np

from ..conf import get_config
from ..exceptions import ConfigError, InfeasibleInstance, OracleTooLarge
from ..sampling import RngState, Stream
from .instance import MdpInstance, Policy
from .oracles import feasibility_margin, mixing_time, occupancy

logger = logging.getLogger("mdp_smd.mdp.generators")

KINDS = ("random_mixing", "random_dmdp", "constrained")
COST_FRACTION = 0.8


def _actions(params: Mapping[str, Any], S: int) -> Sequence[int]:
    actions = params.get("actions", 2)
    if isinstance(actions, int):
        actions = [actions] * S
    actions = [int(a) for a in actions]
    if len(actions) != S or any(a < 1 for a in actions):
        raise ConfigError(f"actions must be a positive count or a list of {S} positive counts")
    return actions


def _transitions(gen: np.random.Generator, A: int, S: int, alpha: float) -> np.ndarray:
    rows = gen.dirichlet(np.ones(S), size=A)
    rows = (1.0 - alpha) * rows + alpha / S
    return rows / rows.sum(axis=1, keepdims=True)


def normalize_costs(D_raw: np.ndarray, mu0: np.ndarray, fraction: float = COST_FRACTION) -> np.ndarray:
    """Scale column k by 1/c_k with c_k = fraction·(D_rawᵀμ₀)_k.

    The reference occupancy μ₀ then satisfies Dᵀμ₀ = 1/fraction > 1.
    """
    c = fraction * (D_raw.T @ mu0)
    if np.any(c <= 0.0):
        raise InfeasibleInstance("a constraint column has zero cost under the reference occupancy")
    return D_raw / c


def generate_instance(kind: str, params: Mapping[str, Any], rng: Union[RngState, int]) -> MdpInstance:
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")
    rng = rng if isinstance(rng, RngState) else RngState(int(rng), Stream.GENERATOR)
    gen = rng.generator

    S = int(params.get("S", 0))
    if S < 1:
        raise ConfigError(f"S must be a positive integer, got {params.get('S')!r}")
    actions = _actions(params, S)
    alpha = float(params.get("alpha", 0.3))
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"alpha must lie in (0, 1], got {alpha}")
    A = sum(actions)

    if kind == "random_dmdp":
        gamma = float(params.get("gamma", 0.9))
        if not 0.0 < gamma < 1.0:
            raise ConfigError(f"gamma must lie in (0, 1), got {gamma}")
        mdp = MdpInstance(
            n_states=S,
            actions=actions,
            transitions=_transitions(gen, A, S, alpha),
            rewards=gen.uniform(0.0, 1.0, size=A),
            gamma=gamma,
            q=np.full(S, 1.0 / S),
        )
        logger.info("generated random_dmdp S=%d A=%d gamma=%g", S, A, gamma)
        return mdp

    if kind == "random_mixing":
        mdp = MdpInstance(
            n_states=S,
            actions=actions,
            transitions=_transitions(gen, A, S, alpha),
            rewards=gen.uniform(0.0, 1.0, size=A),
        )
        return _with_mixing_time(mdp)

    K = int(params.get("K", 1))
    D_max = float(params.get("D_max", 1.0))
    if K < 1:
        raise ConfigError(f"K must be a positive integer, got {K}")
    if not D_max > 0.0:
        raise ConfigError(f"D_max must be positive, got {D_max}")

    attempts = get_config()["feasibility_attempts"]
    for attempt in range(1, attempts + 1):
        base = MdpInstance(
            n_states=S,
            actions=actions,
            transitions=_transitions(gen, A, S, alpha),
            rewards=gen.uniform(0.0, 1.0, size=A),
        )
        D_raw = gen.uniform(0.0, D_max, size=(A, K))
        mu0 = occupancy(base, Policy.uniform(base))
        try:
            D = normalize_costs(D_raw, mu0)
        except InfeasibleInstance:
            continue
        mdp = base.replace(D=D)
        tau, _ = feasibility_margin(mdp)
        if tau > 1.0:
            logger.info(
                "generated constrained S=%d A=%d K=%d after %d attempt(s), margin %.4f",
                S, A, K, attempt, tau,
            )
            return _with_mixing_time(mdp.replace(feasibility_checked=True))
    raise InfeasibleInstance(f"no strictly feasible constrained instance after {attempts} attempts")


def _with_mixing_time(mdp: MdpInstance) -> MdpInstance:
    try:
        t_mix = mixing_time(mdp)
    except OracleTooLarge as exc:
        logger.warning("t_mix not recorded: %s", exc)
        return mdp
    logger.info("generated instance S=%d A=%d t_mix=%d", mdp.n_states, mdp.n_pairs, t_mix)
    return mdp.replace(t_mix=t_mix)
