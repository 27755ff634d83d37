"""
mdp_smd.solvers.mdp
~~~~~~~~~~~~~~~~~~~
Stochastic mirror descent for mixing average-reward and discounted MDPs.

Both problems are bilinear saddle points over v ∈ 2M·[−1,1]^S and
μ ∈ Δ^A:

    mixing       f(v, μ) = μᵀ((P − Î)v + r)                      M = 2·t_mix
    discounted   f(v, μ) = (1−γ)qᵀv + μᵀ((γP − Î)v + r)           M = 1/(1−γ)

Each iteration spends two generative-model draws: one for the v-estimator
(pair drawn from μ) and one for the μ-estimator (pair drawn uniformly).
The averaged μ is rounded to a policy π_i ∝ μ_{i,·}.

Usage::

    report, policy = solve_mdp(mdp, eps=0.15, seed=1)
    report.final_subopt
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..exceptions import ConfigError, NonUniqueStationary, OracleTooLarge
from ..framework import (
    BilinearProblem,
    BoundedEstimator,
    EstimatorBounds,
    NormKind,
    SampleCounter,
    SmdSchedule,
    SmdState,
    SolveReport,
    SparseGradient,
    check_eps,
    constants_for,
    exact_gap,
    run_smd,
    schedule_for,
)
from ..mdp.instance import GenerativeModel, MdpInstance, Policy
from ..mdp.oracles import (
    DISCOUNTED,
    MIXING,
    OptimalSolution,
    evaluate_policy,
    mixing_time,
    optimal_oracle,
    resolve_mode,
)
from ..numeric import SimplexDomain
from ..sampling import AliasTable, RngState

logger = logging.getLogger("mdp_smd.solvers.mdp")

LAMBDA_FLOOR = 1e-12


@dataclass(frozen=True)
class MdpSaddleConfig:
    mode: str
    M: float
    eps: float
    schedule: Optional[SmdSchedule] = None
    t_mix: Optional[int] = None

    @property
    def radius(self) -> float:
        return 2.0 * self.M

    @property
    def internal_eps(self) -> float:
        return self.schedule.eps if self.schedule is not None else self.eps


def saddle_config(
    mdp: MdpInstance,
    eps: float,
    mode: Optional[str] = None,
    t_mix: Optional[int] = None,
) -> MdpSaddleConfig:
    """M and the target accuracy, without a schedule."""
    check_eps(eps)
    mode = resolve_mode(mdp, mode)
    if mode == DISCOUNTED:
        return MdpSaddleConfig(DISCOUNTED, 1.0 / (1.0 - mdp.gamma), eps)
    if t_mix is None:
        t_mix = mdp.t_mix
    if t_mix is None:
        try:
            t_mix = mixing_time(mdp)
        except OracleTooLarge:
            raise ConfigError("instance is too large for the mixing-time oracle; supply t_mix")
        logger.info("t_mix=%d from deterministic policies (a lower bound)", t_mix)
    if t_mix < 1:
        raise ConfigError(f"t_mix must be at least 1, got {t_mix}")
    return MdpSaddleConfig(MIXING, 2.0 * t_mix, eps, t_mix=int(t_mix))


def mdp_problem(cfg: MdpSaddleConfig, mdp: MdpInstance) -> BilinearProblem:
    """The saddle problem in bilinear form (M, b, c, radius)."""
    if cfg.mode == DISCOUNTED:
        return BilinearProblem(
            mdp.gamma * mdp.transitions - mdp.I_hat,
            (1.0 - mdp.gamma) * _require_q(mdp),
            -mdp.rewards,
            cfg.radius,
        )
    return BilinearProblem(mdp.transitions - mdp.I_hat, np.zeros(mdp.n_states), -mdp.rewards, cfg.radius)


def _require_q(mdp: MdpInstance) -> np.ndarray:
    if mdp.q is None:
        raise ConfigError("discounted solving needs an initial distribution q")
    return mdp.q


def mu_bounds(M: float, n_pairs: int) -> EstimatorBounds:
    """Max entry and local second moment of the μ-estimators for ‖v‖∞ ≤ M."""
    return EstimatorBounds((2.0 * M + 1.0) * n_pairs, 9.0 * (M * M + 1.0) * n_pairs, NormKind.LOCAL_SIMPLEX)


V_BOUNDS = EstimatorBounds(1.0, 2.0, NormKind.EUCLIDEAN)


# ─────────────────────────────────────────────────────── estimators

class _MdpEstimator(BoundedEstimator):
    def __init__(self, mdp: MdpInstance, bounds: EstimatorBounds, counter: Optional[SampleCounter] = None) -> None:
        super().__init__(bounds, counter)
        self.mdp = mdp
        self.model = GenerativeModel(mdp, self.counter)


class VMixing(_MdpEstimator):
    """e_j − e_i with (i,a) ∼ μ and j ∼ p_i(a); unbiased for (P − Î)ᵀμ."""

    block = "x"

    def __init__(self, mdp: MdpInstance, counter: Optional[SampleCounter] = None) -> None:
        super().__init__(mdp, V_BOUNDS, counter)

    def draw(self, state: SmdState, rng: RngState) -> SparseGradient:
        row = state.sample_dual(rng)
        i = int(self.mdp.state_of[row])
        j = self.model.sample_row(row, rng)
        return SparseGradient().add(j, 1.0).add(i, -1.0)

    def exact(self, state: SmdState) -> np.ndarray:
        return (self.mdp.transitions - self.mdp.I_hat).T @ state.y()


class MuMixing(_MdpEstimator):
    """|A|·(v_i − v_j − r_{i,a})·e_{i,a} with (i,a) uniform and j ∼ p_i(a)."""

    block = "y"

    def __init__(self, mdp: MdpInstance, M: float, counter: Optional[SampleCounter] = None) -> None:
        super().__init__(mdp, mu_bounds(M, mdp.n_pairs), counter)

    def _discount(self) -> float:
        return 1.0

    def draw(self, state: SmdState, rng: RngState) -> SparseGradient:
        mdp = self.mdp
        row = rng.index(mdp.n_pairs)
        i = int(mdp.state_of[row])
        j = self.model.sample_row(row, rng)
        v = state.x
        value = mdp.n_pairs * (v[i] - self._discount() * v[j] - mdp.rewards[row])
        return SparseGradient({row: value})

    def exact(self, state: SmdState) -> np.ndarray:
        mdp = self.mdp
        return (mdp.I_hat - self._discount() * mdp.transitions) @ state.x - mdp.rewards


class VDiscounted(_MdpEstimator):
    """(1−γ)e_{i′} + γe_j − e_i with i′ ∼ q, (i,a) ∼ μ and j ∼ p_i(a).

    The draw from q is not a generative-model sample and is not counted.
    """

    block = "x"

    def __init__(self, mdp: MdpInstance, counter: Optional[SampleCounter] = None) -> None:
        super().__init__(mdp, V_BOUNDS, counter)
        self.gamma = mdp.gamma
        self._q = AliasTable.build(_require_q(mdp))

    def draw(self, state: SmdState, rng: RngState) -> SparseGradient:
        row = state.sample_dual(rng)
        i = int(self.mdp.state_of[row])
        j = self.model.sample_row(row, rng)
        start = self._q.sample(rng)
        g = SparseGradient().add(start, 1.0 - self.gamma).add(j, self.gamma).add(i, -1.0)
        return g

    def exact(self, state: SmdState) -> np.ndarray:
        mdp = self.mdp
        return (1.0 - self.gamma) * mdp.q + (self.gamma * mdp.transitions - mdp.I_hat).T @ state.y()


class MuDiscounted(MuMixing):
    """|A|·(v_i − γv_j − r_{i,a})·e_{i,a}; unbiased for (Î − γP)v − r."""

    def __init__(self, mdp: MdpInstance, M: float, counter: Optional[SampleCounter] = None) -> None:
        if mdp.gamma is None:
            raise ConfigError("discounted estimator needs an instance with gamma")
        super().__init__(mdp, M, counter)

    def _discount(self) -> float:
        return self.mdp.gamma


def mdp_estimators(cfg: MdpSaddleConfig, mdp: MdpInstance, counter: SampleCounter) -> Dict[str, BoundedEstimator]:
    if cfg.mode == DISCOUNTED:
        return {"x": VDiscounted(mdp, counter), "y": MuDiscounted(mdp, cfg.M, counter)}
    return {"x": VMixing(mdp, counter), "y": MuMixing(mdp, cfg.M, counter)}


# ─────────────────────────────────────────────────────── gaps & rounding

def exact_mdp_gap(cfg: MdpSaddleConfig, mdp: MdpInstance, v, mu) -> float:
    return exact_gap(mdp_problem(cfg, mdp), v, mu)


def saddle_value_lower_bound(cfg: MdpSaddleConfig, mdp: MdpInstance, mu, optimum: OptimalSolution) -> float:
    """Saddle value minus f(v*, μ); never exceeds the gap at (·, μ).

    Mixing: μᵀ[(Î − P)v* − r] + v̄*. Discounted: the same with γP and the
    saddle value (1−γ)·v̄*.
    """
    problem = mdp_problem(cfg, mdp)
    saddle = optimum.v_bar if cfg.mode == MIXING else (1.0 - mdp.gamma) * optimum.v_bar
    return saddle - problem.value(optimum.values, np.asarray(mu, dtype=np.float64))


def round_to_policy(mu, mdp: MdpInstance) -> Policy:
    """π_i = μ_{i,·}/λ_i with λ_i = Σ_a μ_{i,a}; uniform where λ_i ≤ 1e-12."""
    mu = np.asarray(mu, dtype=np.float64)
    if not SimplexDomain(mdp.n_pairs).contains(mu):
        logger.debug("rounding a μ outside the simplex")
    rows = []
    for i in range(mdp.n_states):
        lo = int(mdp.offsets[i])
        block = np.clip(mu[lo:lo + mdp.actions[i]], 0.0, None)
        mass = float(block.sum())
        if mass > LAMBDA_FLOOR:
            rows.append(block / mass)
        else:
            rows.append(np.full(mdp.actions[i], 1.0 / mdp.actions[i]))
    return Policy(rows)


# ─────────────────────────────────────────────────────── solve

def _subopt_observer(mdp: MdpInstance, mode: str, optimum: Optional[OptimalSolution]):
    if optimum is None:
        return None

    def observe(t, x_avg, y_avg, s_avg):
        try:
            return optimum.v_bar - evaluate_policy(mdp, round_to_policy(y_avg, mdp), mode).v_bar
        except NonUniqueStationary:
            logger.warning("checkpoint t=%d: rounded policy is multichain; subopt not recorded", t)
            return None

    return observe


def solve_mdp(
    mdp: MdpInstance,
    eps: float,
    seed: int,
    mode: Optional[str] = None,
    *,
    t_mix: Optional[int] = None,
    iterations: Optional[int] = None,
    accumulator: Optional[str] = None,
    sampler: Optional[str] = None,
    constants: Optional[str] = None,
    checkpoints: Optional[int] = None,
    evaluate: bool = True,
) -> Tuple[SolveReport, Policy]:
    """Solve to expected ε-optimality and round to a policy.

    The saddle problem is solved to ε/3 (mixing) or (1−γ)·ε/3
    (discounted). On desk-scale instances every checkpoint records the
    exact suboptimality v̄* − v̄^π of the rounded policy.
    """
    cfg = saddle_config(mdp, eps, mode, t_mix)
    internal = eps / 3.0 if cfg.mode == MIXING else (1.0 - mdp.gamma) * eps / 3.0
    counter = SampleCounter()
    estimators = mdp_estimators(cfg, mdp, counter)
    schedule = schedule_for(
        internal,
        mdp.n_states,
        cfg.radius,
        mdp.n_pairs,
        estimators["x"].bounds.v,
        estimators["y"].bounds.v,
        constants=constants_for(constants),
        checkpoints=checkpoints,
    )
    if iterations is not None:
        logger.info("iteration override: T=%d (schedule asked for %d)", iterations, schedule.T)
        schedule = schedule.with_iterations(iterations)
    cfg = MdpSaddleConfig(cfg.mode, cfg.M, eps, schedule, cfg.t_mix)

    optimum: Optional[OptimalSolution] = None
    if evaluate:
        try:
            optimum = optimal_oracle(mdp, cfg.mode)
        except OracleTooLarge as exc:
            logger.warning("suboptimality not tracked: %s", exc)

    report = run_smd(
        mdp_problem(cfg, mdp),
        estimators,
        schedule,
        RngState(int(seed)),
        accumulator,
        sampler=sampler,
        counter=counter,
        observer=_subopt_observer(mdp, cfg.mode, optimum),
        label=cfg.mode,
    )
    policy = round_to_policy(report.y, mdp)
    report.eps = eps
    report.policy = policy.to_list()
    report.extra.update({
        "internal_eps": internal,
        "M": cfg.M,
        "radius": cfg.radius,
        "t_mix": cfg.t_mix,
        "gamma": mdp.gamma,
    })
    if optimum is not None:
        report.extra["v_bar_opt"] = optimum.v_bar
        report.extra["subopt"] = report.final_subopt
    return report, policy
