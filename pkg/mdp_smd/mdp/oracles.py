"""
mdp_smd.mdp.oracles
~~~~~~~~~~~~~~~~~~~
Exact small-instance oracles: induced chains, stationary distributions,
policy evaluation, optimal policies, mixing times and norm-bound checks.

Average-reward ("mixing") instances are solved by enumerating deterministic
policies while ``S ≤ ORACLE_MAX_STATES`` and ``Π|A_i| ≤ ORACLE_MAX_POLICIES``,
then refined by Howard improvement so the returned bias satisfies the
optimality equation. Larger instances fall back to Howard policy iteration
up to ``POLICY_ITERATION_MAX_STATES`` states.

Mixing times are maximised over deterministic policies only, so the value
is a lower bound on the constant of the mixing assumption.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from ..conf import get_config
from ..exceptions import (
    ConfigError,
    DomainError,
    InfeasibleInstance,
    NonUniqueStationary,
    NotMixing,
    OracleTooLarge,
    SingularMatrix,
)
from ..numeric import inf_operator_norm, invert, solve_linear
from .instance import MdpInstance, Policy

logger = logging.getLogger("mdp_smd.mdp.oracles")

MIXING = "mixing"
DISCOUNTED = "discounted"

MIXING_THRESHOLD = 0.5
STATIONARY_TOL = 1e-9
TIE_TOL = 1e-12
HOWARD_MAX_ROUNDS = 10_000
VALUE_ITERATION_MAX_ROUNDS = 10_000_000


def resolve_mode(mdp: MdpInstance, mode: Optional[str] = None) -> str:
    if mode is None:
        return DISCOUNTED if mdp.gamma is not None else MIXING
    if mode not in (MIXING, DISCOUNTED):
        raise ConfigError(f"mode must be {MIXING!r} or {DISCOUNTED!r}, got {mode!r}")
    if mode == DISCOUNTED and mdp.gamma is None:
        raise ConfigError("discounted mode needs an instance with gamma")
    return mode


def initial_distribution(mdp: MdpInstance) -> np.ndarray:
    """q, or the uniform distribution when the instance carries none."""
    if mdp.q is not None:
        return mdp.q
    return np.full(mdp.n_states, 1.0 / mdp.n_states)


# ─────────────────────────────────────────────────────── chains

def induced_chain(mdp: MdpInstance, pi: Policy) -> Tuple[np.ndarray, np.ndarray]:
    """P^π = Π·P and r^π = Π·r."""
    Pi = pi.matrix(mdp)
    return Pi @ mdp.transitions, Pi @ mdp.rewards


def stationary_distribution(Ppi) -> np.ndarray:
    """Unique ν with (P^π)ᵀν = ν and Σν = 1.

    One equation of (I − P)ᵀν = 0 is redundant; it is replaced by the
    normalisation row. A rank drop beyond that single direction means the
    chain has several closed classes.
    """
    P = np.asarray(Ppi, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise DomainError(f"transition matrix must be square, got shape {P.shape}")
    S = P.shape[0]
    A = (np.eye(S) - P).T
    A[-1, :] = 1.0
    rhs = np.zeros(S)
    rhs[-1] = 1.0
    try:
        nu = solve_linear(A, rhs)
    except SingularMatrix as exc:
        raise NonUniqueStationary(f"chain has no unique stationary distribution ({exc})")

    nu = np.where(nu < 0.0, 0.0, nu)
    nu = nu / nu.sum()
    residual = float(np.max(np.abs(P.T @ nu - nu)))
    if residual > STATIONARY_TOL:
        raise NonUniqueStationary(f"stationary residual {residual:.3e} exceeds {STATIONARY_TOL}")
    return nu


def occupancy(mdp: MdpInstance, pi: Policy) -> np.ndarray:
    """μ^π = ν^π ∘ π over state-action pairs."""
    Ppi, _ = induced_chain(mdp, pi)
    nu = stationary_distribution(Ppi)
    return nu[mdp.state_of] * pi.flat()


# ─────────────────────────────────────────────────────── evaluation

@dataclass
class PolicyEvaluation:
    mode: str
    v_bar: float
    stationary: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "v_bar": float(self.v_bar),
            "stationary": None if self.stationary is None else self.stationary.tolist(),
            "values": None if self.values is None else self.values.tolist(),
        }


def _bias(Ppi: np.ndarray, rpi: np.ndarray, nu: np.ndarray, v_bar: float) -> np.ndarray:
    """h with (I − P + 1νᵀ)h = r − v̄·1, which forces νᵀh = 0."""
    S = Ppi.shape[0]
    return solve_linear(np.eye(S) - Ppi + np.outer(np.ones(S), nu), rpi - v_bar)


def evaluate_policy(mdp: MdpInstance, pi: Policy, mode: Optional[str] = None) -> PolicyEvaluation:
    """Exact v̄^π.

    Mixing: ν^π, v̄ = νᵀr^π and the bias as ``values``.
    Discounted: values = (I − γP^π)⁻¹r^π and v̄ = qᵀvalues.
    """
    mode = resolve_mode(mdp, mode)
    Ppi, rpi = induced_chain(mdp, pi)
    if mode == DISCOUNTED:
        values = solve_linear(np.eye(mdp.n_states) - mdp.gamma * Ppi, rpi)
        return PolicyEvaluation(mode, float(initial_distribution(mdp) @ values), values=values)
    nu = stationary_distribution(Ppi)
    v_bar = float(nu @ rpi)
    return PolicyEvaluation(mode, v_bar, stationary=nu, values=_bias(Ppi, rpi, nu, v_bar))


# ─────────────────────────────────────────────────────── optimal policies

class OptimalSolution(NamedTuple):
    v_bar: float
    policy: Policy
    values: np.ndarray


def deterministic_choices(mdp: MdpInstance) -> Iterator[Tuple[int, ...]]:
    return itertools.product(*(range(a) for a in mdp.actions))


def deterministic_policies(mdp: MdpInstance) -> Iterator[Policy]:
    for choices in deterministic_choices(mdp):
        yield Policy.deterministic(mdp, choices)


def _enumerable(mdp: MdpInstance) -> bool:
    cfg = get_config()
    return mdp.n_states <= cfg["oracle_max_states"] and mdp.policy_count <= cfg["oracle_max_policies"]


def _require_enumerable(mdp: MdpInstance, what: str) -> None:
    if not _enumerable(mdp):
        cfg = get_config()
        raise OracleTooLarge(
            f"{what} enumerates {mdp.policy_count} policies over {mdp.n_states} states; "
            f"limits are {cfg['oracle_max_policies']} policies and {cfg['oracle_max_states']} states"
        )


def _greedy(mdp: MdpInstance, q_values: np.ndarray, current: Optional[List[int]] = None) -> List[int]:
    """Per-state argmax; the current action wins ties within 1e-12."""
    choices = []
    for i in range(mdp.n_states):
        lo = int(mdp.offsets[i])
        block = q_values[lo:lo + mdp.actions[i]]
        best = int(np.argmax(block))
        if current is not None and block[current[i]] >= block[best] - TIE_TOL:
            best = current[i]
        choices.append(best)
    return choices


def _howard(mdp: MdpInstance, choices: List[int]) -> Tuple[List[int], PolicyEvaluation]:
    """Average-reward policy iteration from ``choices`` until no state improves."""
    for _ in range(HOWARD_MAX_ROUNDS):
        evaluation = evaluate_policy(mdp, Policy.deterministic(mdp, choices), MIXING)
        q_values = mdp.rewards + mdp.transitions @ evaluation.values
        improved = _greedy(mdp, q_values, choices)
        if improved == choices:
            return choices, evaluation
        choices = improved
    raise NotMixing(f"policy iteration did not settle within {HOWARD_MAX_ROUNDS} rounds")


def _optimal_mixing(mdp: MdpInstance) -> OptimalSolution:
    if _enumerable(mdp):
        best: Optional[Tuple[float, List[int]]] = None
        skipped = 0
        for choices in deterministic_choices(mdp):
            Ppi, rpi = induced_chain(mdp, Policy.deterministic(mdp, choices))
            try:
                nu = stationary_distribution(Ppi)
            except NonUniqueStationary:
                skipped += 1
                continue
            v_bar = float(nu @ rpi)
            if best is None or v_bar > best[0] + TIE_TOL:
                best = (v_bar, list(choices))
        if best is None:
            raise NotMixing("no deterministic policy has a unique stationary distribution")
        if skipped:
            logger.warning("optimal oracle skipped %d multichain policies", skipped)
        start = best[1]
    else:
        limit = get_config()["policy_iteration_max_states"]
        if mdp.n_states > limit:
            raise OracleTooLarge(f"{mdp.n_states} states exceed the policy-iteration limit of {limit}")
        logger.warning(
            "optimal oracle: %d policies over %d states, falling back to policy iteration",
            mdp.policy_count, mdp.n_states,
        )
        start = _greedy(mdp, mdp.rewards)

    choices, evaluation = _howard(mdp, start)
    return OptimalSolution(evaluation.v_bar, Policy.deterministic(mdp, choices), evaluation.values)


def _optimal_discounted(mdp: MdpInstance) -> OptimalSolution:
    gamma = mdp.gamma
    tol = 1e-10 * (1.0 - gamma) / gamma
    v = np.zeros(mdp.n_states)
    for rounds in range(1, VALUE_ITERATION_MAX_ROUNDS + 1):
        q_values = mdp.rewards + gamma * (mdp.transitions @ v)
        v_next = np.maximum.reduceat(q_values, mdp.offsets)
        delta = float(np.max(np.abs(v_next - v)))
        v = v_next
        if delta <= tol:
            break
    logger.debug("value iteration converged after %d rounds", rounds)
    choices = _greedy(mdp, mdp.rewards + gamma * (mdp.transitions @ v))
    policy = Policy.deterministic(mdp, choices)
    evaluation = evaluate_policy(mdp, policy, DISCOUNTED)
    return OptimalSolution(evaluation.v_bar, policy, evaluation.values)


def optimal_oracle(mdp: MdpInstance, mode: Optional[str] = None) -> OptimalSolution:
    """(v̄*, π*, v*) for the instance.

    Mixing: v* is the bias of π*, normalised so that ⟨ν*, v*⟩ = 0.
    Discounted: v* is the optimal value vector and v̄* = qᵀv*.
    """
    mode = resolve_mode(mdp, mode)
    if mode == DISCOUNTED:
        return _optimal_discounted(mdp)
    return _optimal_mixing(mdp)


def enumerate_optimal_discounted(mdp: MdpInstance) -> OptimalSolution:
    """Best deterministic policy by brute force; cross-checks value iteration."""
    resolve_mode(mdp, DISCOUNTED)
    _require_enumerable(mdp, "discounted enumeration")
    best: Optional[Tuple[float, Policy, np.ndarray]] = None
    for policy in deterministic_policies(mdp):
        evaluation = evaluate_policy(mdp, policy, DISCOUNTED)
        if best is None or evaluation.v_bar > best[0] + TIE_TOL:
            best = (evaluation.v_bar, policy, evaluation.values)
    return OptimalSolution(*best)


# ─────────────────────────────────────────────────────── mixing times

def chain_mixing_time(Ppi, max_steps: Optional[int] = None) -> int:
    """Smallest t ≥ 1 with max_i ‖P^t(i,·) − ν‖₁ ≤ 1/2."""
    P = np.asarray(Ppi, dtype=np.float64)
    max_steps = max_steps or get_config()["mixing_time_max_steps"]
    try:
        nu = stationary_distribution(P)
    except NonUniqueStationary as exc:
        raise NotMixing(str(exc))
    power = P.copy()
    for t in range(1, max_steps + 1):
        distance = float(np.max(np.abs(power - nu).sum(axis=1)))
        if distance <= MIXING_THRESHOLD + 1e-12:
            return t
        power = power @ P
    raise NotMixing(f"ℓ1 distance to stationarity stays above 1/2 for {max_steps} steps")


def mixing_time(mdp: MdpInstance, max_steps: Optional[int] = None) -> int:
    """Max chain mixing time over deterministic policies."""
    _require_enumerable(mdp, "mixing_time")
    worst = 0
    for policy in deterministic_policies(mdp):
        Ppi, _ = induced_chain(mdp, policy)
        worst = max(worst, chain_mixing_time(Ppi, max_steps))
    return worst


# ─────────────────────────────────────────────────────── norm bounds

@dataclass
class NormBoundReport:
    mode: str
    norm: float
    bound: float
    t_mix: Optional[int] = None

    @property
    def passed(self) -> bool:
        return self.norm <= self.bound + 1e-9

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "norm": float(self.norm),
            "bound": float(self.bound),
            "t_mix": self.t_mix,
            "passed": self.passed,
        }


def verify_norm_bounds(
    mdp: MdpInstance, pi: Policy, mode: Optional[str] = None, t_mix: Optional[int] = None
) -> NormBoundReport:
    """‖(I − P^π + 1νᵀ)⁻¹‖∞ ≤ 2·t_mix, or ‖(I − γP^π)⁻¹‖∞ ≤ 1/(1−γ).

    Without an explicit ``t_mix`` the mixing time of the policy's own chain
    is used.
    """
    mode = resolve_mode(mdp, mode)
    Ppi, _ = induced_chain(mdp, pi)
    S = mdp.n_states
    if mode == DISCOUNTED:
        norm = inf_operator_norm(invert(np.eye(S) - mdp.gamma * Ppi))
        return NormBoundReport(mode, norm, 1.0 / (1.0 - mdp.gamma))
    nu = stationary_distribution(Ppi)
    if t_mix is None:
        t_mix = chain_mixing_time(Ppi)
    norm = inf_operator_norm(invert(np.eye(S) - Ppi + np.outer(np.ones(S), nu)))
    return NormBoundReport(mode, norm, 2.0 * t_mix, t_mix)


@dataclass
class PowerDecayReport:
    t_mix: int
    rows: List[Tuple[int, float, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(norm <= bound + 1e-9 for _, norm, bound in self.rows)

    @property
    def worst_ratio(self) -> float:
        return max((norm / bound for _, norm, bound in self.rows), default=0.0)


def power_decay_check(Ppi, t_mix: Optional[int] = None, horizon: int = 10) -> PowerDecayReport:
    """‖P^k − 1νᵀ‖∞ ≤ (1/2)^⌊k/t_mix⌋ for t_mix ≤ k ≤ horizon·t_mix."""
    P = np.asarray(Ppi, dtype=np.float64)
    nu = stationary_distribution(P)
    if t_mix is None:
        t_mix = chain_mixing_time(P)
    limit = np.outer(np.ones(P.shape[0]), nu)
    report = PowerDecayReport(t_mix)
    power = np.linalg.matrix_power(P, t_mix)
    for k in range(t_mix, horizon * t_mix + 1):
        # (P − 1νᵀ)^k = P^k − 1νᵀ since νᵀP = νᵀ and P1 = 1.
        report.rows.append((k, inf_operator_norm(power - limit), 0.5 ** (k // t_mix)))
        power = power @ P
    return report


# ─────────────────────────────────────────────────────── constraints

def feasibility_margin(mdp: MdpInstance) -> Tuple[float, np.ndarray]:
    """max{τ : Dᵀμ ≥ τ·1, μ stationary occupancy} and its maximiser.

    The instance is strictly feasible iff τ > 1.
    """
    if mdp.D is None:
        raise ConfigError("instance has no constraint matrix D")
    A, S, K = mdp.n_pairs, mdp.n_states, mdp.K
    # Variables (μ, τ); minimise −τ.
    cost = np.zeros(A + 1)
    cost[-1] = -1.0
    A_ub = np.hstack([-mdp.D.T, np.ones((K, 1))])
    b_ub = np.zeros(K)
    flow = (mdp.I_hat - mdp.transitions).T
    A_eq = np.vstack([
        np.hstack([flow, np.zeros((S, 1))]),
        np.hstack([np.ones((1, A)), np.zeros((1, 1))]),
    ])
    b_eq = np.zeros(S + 1)
    b_eq[-1] = 1.0
    bounds = [(0.0, None)] * A + [(None, None)]
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        raise InfeasibleInstance(f"feasibility program failed: {res.message}")
    mu = np.clip(res.x[:A], 0.0, None)
    return float(res.x[-1]), mu / mu.sum()


# ─────────────────────────────────────────────────────── reports

def evaluation_report(
    mdp: MdpInstance, pi: Policy, mode: Optional[str] = None, t_mix: Optional[int] = None
) -> Dict[str, Any]:
    """{v_bar, policy, stationary, norms, t_mix} for ``manage.py eval``."""
    mode = resolve_mode(mdp, mode)
    evaluation = evaluate_policy(mdp, pi, mode)
    norms = verify_norm_bounds(mdp, pi, mode, t_mix)
    report: Dict[str, Any] = {
        "mode": mode,
        "v_bar": evaluation.v_bar,
        "policy": pi.to_list(),
        "stationary": None if evaluation.stationary is None else evaluation.stationary.tolist(),
        "values": evaluation.values.tolist(),
        "norms": norms.to_dict(),
        "t_mix": norms.t_mix if mode == MIXING else None,
    }
    if _enumerable(mdp):
        optimum = optimal_oracle(mdp, mode)
        report["v_bar_opt"] = optimum.v_bar
        report["subopt"] = optimum.v_bar - evaluation.v_bar
    return report
