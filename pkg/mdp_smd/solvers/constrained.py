"""
mdp_smd.solvers.constrained
~~~~~~~~~~~~~~~~~~~~~~~~~~~
Mixing average-reward MDPs with occupancy constraints Dᵀμ ≥ 1.

    min_{v ∈ 2M·[−1,1]^S, s ∈ {s ≥ 0, 1ᵀs ≤ 2}}  max_{μ ∈ Δ^A}
        f(v, s, μ) = μᵀ[(Î − P)v + Ds] − 1ᵀs,          M = 2·D_max·t_mix

Three blocks step together: a projected step on v, a rescaled-KL step on
s and a multiplicative step on μ. The objective carries neither rewards
nor discounting; the μ-estimator follows it exactly.

A run reports the constraint violation of the rounded policy measured on
its true occupancy μ^π = ν^π ∘ π:

    stationarity_l1 = ‖(Î − P)ᵀμ^π‖₁        (0 up to rounding)
    min_Dmu         = min_k (Dᵀμ^π)_k         (≥ 1 − ε expected)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, NamedTuple, Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from ..exceptions import ConfigError, InfeasibleInstance, NonUniqueStationary, OracleTooLarge
from ..framework import (
    BoundedEstimator,
    EstimatorBounds,
    NormKind,
    SaddleProblem,
    SampleCounter,
    SmdSchedule,
    SmdState,
    SolveReport,
    SparseGradient,
    block_schedule,
    check_eps,
    constants_for,
    exact_gap,
    run_smd,
)
from ..mdp.instance import GenerativeModel, MdpInstance, Policy
from ..mdp.oracles import feasibility_margin, mixing_time, occupancy
from ..numeric import BoxDomain, CappedOrthantDomain, SimplexDomain
from ..sampling import RngState
from .mdp import V_BOUNDS, round_to_policy

logger = logging.getLogger("mdp_smd.solvers.constrained")

CAP = 2.0
FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class ConstrainedConfig:
    K: int
    D_max: float
    t_mix: int
    eps: float
    schedule: Optional[SmdSchedule] = None

    @property
    def M(self) -> float:
        return 2.0 * self.D_max * self.t_mix

    @property
    def radius(self) -> float:
        return 2.0 * self.M


def constrained_config(mdp: MdpInstance, eps: float, t_mix: Optional[int] = None) -> ConstrainedConfig:
    check_eps(eps)
    if mdp.D is None:
        raise ConfigError("constrained solving needs an instance with a constraint matrix D")
    if t_mix is None:
        t_mix = mdp.t_mix
    if t_mix is None:
        try:
            t_mix = mixing_time(mdp)
        except OracleTooLarge:
            raise ConfigError("instance is too large for the mixing-time oracle; supply t_mix")
        logger.info("t_mix=%d from deterministic policies (a lower bound)", t_mix)
    return ConstrainedConfig(mdp.K, mdp.D_max, int(t_mix), eps)


class ConstrainedProblem(SaddleProblem):
    def __init__(self, mdp: MdpInstance, cfg: ConstrainedConfig) -> None:
        self.mdp = mdp
        self.cfg = cfg
        self.flow = mdp.I_hat - mdp.transitions
        self.box = BoxDomain(mdp.n_states, cfg.radius)
        self.simplex = SimplexDomain(mdp.n_pairs)
        self.capped = CappedOrthantDomain(mdp.K, CAP)

    def value(self, x, y, s=None) -> float:
        return float(y @ (self.flow @ x + self.mdp.D @ s) - s.sum())

    def gap(self, x, y, s=None) -> float:
        dual_max = float(np.max(self.flow @ x + self.mdp.D @ s)) - float(s.sum())
        box_min = -self.box.radius * float(np.abs(self.flow.T @ y).sum())
        slack_min = min(0.0, CAP * float(np.min(self.mdp.D.T @ y - 1.0)))
        return dual_max - (box_min + slack_min)


# ─────────────────────────────────────────────────────── estimators

def s_bounds(K: int, D_max: float) -> EstimatorBounds:
    return EstimatorBounds(K * D_max + 2.0, 2.0 * K * D_max**2 + 2.0, NormKind.LOCAL_CAPPED)


def mu_constrained_bounds(M: float, D_max: float, n_pairs: int) -> EstimatorBounds:
    scale = 2.0 * M + 1.0 + 2.0 * D_max
    return EstimatorBounds(scale * n_pairs, 2.0 * scale**2 * n_pairs, NormKind.LOCAL_SIMPLEX)


class VConstrained(BoundedEstimator):
    """e_i − e_j with (i,a) ∼ μ, j ∼ p_i(a); unbiased for (Î − P)ᵀμ."""

    block = "x"

    def __init__(self, mdp: MdpInstance, counter: Optional[SampleCounter] = None) -> None:
        super().__init__(V_BOUNDS, counter)
        self.mdp = mdp
        self.model = GenerativeModel(mdp, self.counter)

    def draw(self, state: SmdState, rng: RngState) -> SparseGradient:
        row = state.sample_dual(rng)
        i = int(self.mdp.state_of[row])
        j = self.model.sample_row(row, rng)
        return SparseGradient().add(i, 1.0).add(j, -1.0)

    def exact(self, state: SmdState) -> np.ndarray:
        return (self.mdp.I_hat - self.mdp.transitions).T @ state.y()


class SConstrained(BoundedEstimator):
    """K·d_k(i,a)·e_k − 1 with its own (i,a) ∼ μ and k uniform."""

    block = "s"

    def __init__(self, mdp: MdpInstance, counter: Optional[SampleCounter] = None) -> None:
        super().__init__(s_bounds(mdp.K, mdp.D_max), counter)
        self.mdp = mdp

    def draw(self, state: SmdState, rng: RngState) -> SparseGradient:
        row = state.sample_dual(rng)
        K = self.mdp.K
        k = rng.index(K)
        return SparseGradient({k: K * float(self.mdp.D[row, k])}, shift=-1.0)

    def exact(self, state: SmdState) -> np.ndarray:
        return self.mdp.D.T @ state.y() - 1.0


class MuConstrained(BoundedEstimator):
    """|A|·(v_i − v_j + d_k(i,a)·‖s‖₁)·e_{i,a}; (i,a) uniform, k ∼ s/‖s‖₁.

    Estimates the ascent direction (Î − P)v + Ds. At s = 0 the D-term
    vanishes and k is not drawn.
    """

    block = "y"
    ascent = True

    def __init__(self, mdp: MdpInstance, M: float, counter: Optional[SampleCounter] = None) -> None:
        super().__init__(mu_constrained_bounds(M, mdp.D_max, mdp.n_pairs), counter)
        self.mdp = mdp
        self.model = GenerativeModel(mdp, self.counter)

    def draw(self, state: SmdState, rng: RngState) -> SparseGradient:
        mdp = self.mdp
        row = rng.index(mdp.n_pairs)
        i = int(mdp.state_of[row])
        j = self.model.sample_row(row, rng)
        value = state.x[i] - state.x[j]
        s = state.s
        mass = float(s.sum())
        if mass > 0.0:
            k = int(np.searchsorted(np.cumsum(s), rng.uniform() * mass, side="right"))
            value += float(mdp.D[row, min(k, mdp.K - 1)]) * mass
        return SparseGradient({row: mdp.n_pairs * value})

    def exact(self, state: SmdState) -> np.ndarray:
        return (self.mdp.I_hat - self.mdp.transitions) @ state.x + self.mdp.D @ state.s


def constrained_estimators(
    cfg: ConstrainedConfig, mdp: MdpInstance, counter: SampleCounter
) -> Dict[str, BoundedEstimator]:
    return {
        "x": VConstrained(mdp, counter),
        "s": SConstrained(mdp, counter),
        "y": MuConstrained(mdp, cfg.M, counter),
    }


# ─────────────────────────────────────────────────────── oracles & metrics

def exact_constrained_gap(cfg: ConstrainedConfig, mdp: MdpInstance, v, s, mu) -> float:
    return exact_gap(ConstrainedProblem(mdp, cfg), v, mu, s)


class ConstrainedSaddle(NamedTuple):
    v: np.ndarray
    s: np.ndarray
    mu: np.ndarray
    value: float


def constrained_saddle_oracle(mdp: MdpInstance, cfg: ConstrainedConfig) -> ConstrainedSaddle:
    """An exact saddle triple by linear programming.

    The primal min_{v,s} max_μ f is  min t − 1ᵀs  subject to
    (Î − P)v + Ds ≤ t·1, the box on v and the capped orthant on s; the
    multipliers of the first block of rows are the optimal μ.
    """
    S, K, A = mdp.n_states, mdp.K, mdp.n_pairs
    cost = np.concatenate([np.zeros(S), -np.ones(K), [1.0]])
    coupling = np.hstack([mdp.I_hat - mdp.transitions, mdp.D, -np.ones((A, 1))])
    cap_row = np.concatenate([np.zeros(S), np.ones(K), [0.0]])[None, :]
    A_ub = np.vstack([coupling, cap_row])
    b_ub = np.concatenate([np.zeros(A), [CAP]])
    bounds = [(-cfg.radius, cfg.radius)] * S + [(0.0, None)] * K + [(None, None)]
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0:
        raise InfeasibleInstance(f"saddle program failed: {res.message}")
    mu = np.clip(-res.ineqlin.marginals[:A], 0.0, None)
    mu = mu / mu.sum()
    return ConstrainedSaddle(res.x[:S], np.clip(res.x[S:S + K], 0.0, None), mu, float(res.fun))


def violation_metrics(mdp: MdpInstance, policy: Policy) -> Dict[str, Optional[float]]:
    """Violation of the constraints by the policy's true occupancy."""
    try:
        mu = occupancy(mdp, policy)
    except NonUniqueStationary:
        logger.warning("rounded policy has no unique stationary distribution; violation metrics omitted")
        return {"min_Dmu": None, "stationarity_l1": None}
    return {
        "min_Dmu": float(np.min(mdp.D.T @ mu)),
        "stationarity_l1": float(np.abs((mdp.I_hat - mdp.transitions).T @ mu).sum()),
    }


def check_feasible(mdp: MdpInstance) -> float:
    """Feasibility margin τ; raises InfeasibleInstance when τ < 1."""
    tau, _ = feasibility_margin(mdp)
    if tau < 1.0 - FEASIBILITY_TOL:
        raise InfeasibleInstance(f"no stationary occupancy satisfies Dᵀμ ≥ 1 (best margin {tau:.6g})")
    if tau <= 1.0 + FEASIBILITY_TOL:
        logger.warning("instance is feasible but not strictly feasible (margin %.6g)", tau)
    if not mdp.feasibility_checked:
        logger.info("feasibility certified at solve time (margin %.6g)", tau)
    return tau


# ─────────────────────────────────────────────────────── solve

def solve_constrained(
    mdp: MdpInstance,
    eps: float,
    seed: int,
    *,
    t_mix: Optional[int] = None,
    iterations: Optional[int] = None,
    accumulator: Optional[str] = None,
    sampler: Optional[str] = None,
    constants: Optional[str] = None,
    checkpoints: Optional[int] = None,
) -> Tuple[SolveReport, Policy]:
    """Three-block SMD to an expected ε-approximate saddle point."""
    cfg = constrained_config(mdp, eps, t_mix)
    tau = check_feasible(mdp)
    counter = SampleCounter()
    estimators = constrained_estimators(cfg, mdp, counter)
    problem = ConstrainedProblem(mdp, cfg)
    schedule = block_schedule(
        eps,
        {
            "x": (problem.box.divergence_radius(), estimators["x"].bounds.v),
            "s": (problem.capped.divergence_radius(), estimators["s"].bounds.v),
            "y": (problem.simplex.divergence_radius(), estimators["y"].bounds.v),
        },
        constants=constants_for(constants),
        checkpoints=checkpoints,
    )
    if iterations is not None:
        logger.info("iteration override: T=%d (schedule asked for %d)", iterations, schedule.T)
        schedule = schedule.with_iterations(iterations)

    report = run_smd(
        problem,
        estimators,
        schedule,
        RngState(int(seed)),
        accumulator,
        sampler=sampler,
        counter=counter,
        label="constrained",
    )
    policy = round_to_policy(report.y, mdp)
    report.policy = policy.to_list()
    extra: Dict[str, Any] = {"K": cfg.K, "D_max": cfg.D_max, "t_mix": cfg.t_mix, "M": cfg.M, "margin": tau}
    extra.update(violation_metrics(mdp, policy))
    report.extra.update(extra)
    return report, policy
