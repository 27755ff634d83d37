"""
mdp_smd.verification
~~~~~~~~~~~~~~~~~~~~
Bound checks behind ``manage.py verify``.

Every row compares a measured quantity with the bound it must respect:

    inverse norms        ‖(I − P^π + 1νᵀ)⁻¹‖∞ ≤ 2·t_mix,  ‖(I − γP^π)⁻¹‖∞ ≤ 1/(1−γ)
    value bounds         ‖v*‖∞ ≤ 2·t_mix,  ‖v*‖∞ ≤ 1/(1−γ)
    power decay          ‖P^k − 1νᵀ‖∞ ≤ (1/2)^⌊k/t_mix⌋
    norm suite           the inverse-norm bounds over 50 generated instances per kind
    estimators           empirical mean, second moment and max entry at
                         20 frozen iterates, mean within 4·√(v/N)
    gaps                 closed form against extreme-point enumeration

Rows whose preconditions fail (a periodic chain, an instance too large
for enumeration) are reported as SKIP rather than FAIL.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .exceptions import ConfigError, MdpSmdError, NonUniqueStationary, NotMixing, OracleTooLarge
from .framework import BoundedEstimator, NormKind, SampleCounter, SmdState, vertex_gap
from .mdp import (
    MdpInstance,
    Policy,
    generate_instance,
    induced_chain,
    mixing_time,
    optimal_oracle,
    power_decay_check,
    verify_norm_bounds,
)
from .mdp.oracles import DISCOUNTED, MIXING, chain_mixing_time, deterministic_policies
from .sampling import RngState, Stream
from .solvers.constrained import CAP, ConstrainedProblem, constrained_config, constrained_estimators
from .solvers.game import GameInstance, estimator_x_game, estimator_y_game
from .solvers.mdp import MdpSaddleConfig, mdp_estimators, mdp_problem

logger = logging.getLogger("mdp_smd.verification")

PASS = "PASS"
FAIL = "FAIL"
SKIP = "SKIP"

DEFAULT_DRAWS = 20_000
ITERATES = 20
MOMENT_SLACK = 1.05
GAP_TOL = 1e-9
RANDOM_POLICIES = 50
NORM_SUITE_INSTANCES = 50
NORM_SUITE_MAX_STATES = 6
NORM_SUITE_GAMMAS = (0.5, 0.9, 0.99)


@dataclass
class CheckRow:
    name: str
    measured: Optional[float]
    bound: Optional[float]
    status: str
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "measured": self.measured,
            "bound": self.bound,
            "status": self.status,
            "detail": self.detail,
        }


def _row(name: str, measured: float, bound: float, detail: str = "", slack: float = 1e-9) -> CheckRow:
    status = PASS if measured <= bound + slack else FAIL
    return CheckRow(name, float(measured), float(bound), status, detail)


@dataclass
class VerificationReport:
    rows: List[CheckRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.status != FAIL for row in self.rows)

    def extend(self, rows: Iterable[CheckRow]) -> None:
        self.rows.extend(rows)

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "rows": [row.to_dict() for row in self.rows]}

    def table(self) -> str:
        width = max((len(row.name) for row in self.rows), default=4)
        lines = [f"{'check':<{width}}  {'measured':>12}  {'bound':>12}  status"]
        for row in self.rows:
            measured = "-" if row.measured is None else f"{row.measured:12.6g}"
            bound = "-" if row.bound is None else f"{row.bound:12.6g}"
            line = f"{row.name:<{width}}  {measured:>12}  {bound:>12}  {row.status}"
            if row.detail:
                line += f"  ({row.detail})"
            lines.append(line)
        return "\n".join(lines)


# ─────────────────────────────────────────────────────── chain checks

def mixing_chain_checks(mdp: MdpInstance, label: str = "mixing") -> List[CheckRow]:
    """Inverse-norm, power-decay and value bounds for average-reward instances."""
    names = [f"{label}.inverse_norm", f"{label}.power_decay", f"{label}.value_bound"]
    try:
        t_mix = mixing_time(mdp)
        worst_norm = (0.0, 1.0)
        worst_decay = 0.0
        for policy in deterministic_policies(mdp):
            Ppi, _ = induced_chain(mdp, policy)
            own = chain_mixing_time(Ppi)
            norms = verify_norm_bounds(mdp, policy, MIXING, own)
            if norms.norm / norms.bound > worst_norm[0] / worst_norm[1]:
                worst_norm = (norms.norm, norms.bound)
            worst_decay = max(worst_decay, power_decay_check(Ppi, own).worst_ratio)
        optimum = optimal_oracle(mdp, MIXING)
    except (NotMixing, NonUniqueStationary, OracleTooLarge) as exc:
        return [CheckRow(name, None, None, SKIP, str(exc)) for name in names]
    return [
        _row(names[0], worst_norm[0], worst_norm[1], "worst deterministic policy"),
        _row(names[1], worst_decay, 1.0, "max ratio to (1/2)^⌊k/t_mix⌋"),
        _row(names[2], float(np.max(np.abs(optimum.values))), 2.0 * t_mix, f"t_mix={t_mix}"),
    ]


def _random_policy(mdp: MdpInstance, gen: np.random.Generator) -> Policy:
    return Policy([gen.dirichlet(np.ones(a)) for a in mdp.actions])


def discounted_chain_checks(mdp: MdpInstance, seed: int, label: str = "discounted") -> List[CheckRow]:
    gen = RngState(seed, Stream.EVALUATION).generator
    bound = 1.0 / (1.0 - mdp.gamma)
    worst = max(
        verify_norm_bounds(mdp, _random_policy(mdp, gen), DISCOUNTED).norm for _ in range(RANDOM_POLICIES)
    )
    optimum = optimal_oracle(mdp, DISCOUNTED)
    return [
        _row(f"{label}.inverse_norm", worst, bound, f"{RANDOM_POLICIES} random policies"),
        _row(f"{label}.value_bound", float(np.max(np.abs(optimum.values))), bound),
    ]


# ─────────────────────────────────────────────────────── estimator checks

class Iterate(NamedTuple):
    """A frozen point plus the extra simplex weights its local norm is also measured under."""

    state: SmdState
    weightings: Tuple[np.ndarray, ...] = ()


def estimator_checks(
    name: str,
    estimator: BoundedEstimator,
    iterates: Sequence[Iterate],
    dim: int,
    draws: int,
    seed: int,
) -> List[CheckRow]:
    """Mean, second moment (declared norm) and max entry over ``draws`` draws per iterate.

    Each row reports the worst iterate. Moments are accumulated on the fly so
    10⁶-draw runs need no sample matrix.
    """
    bounds = estimator.bounds
    mean_error = 0.0
    moment = 0.0
    peak = 0.0
    for k, iterate in enumerate(iterates):
        rng = RngState(seed + k, Stream.V)
        total = np.zeros(dim)
        squares = np.zeros(dim)
        for _ in range(draws):
            g = estimator.draw(iterate.state, rng).dense(dim)
            total += g
            squares += g * g
            peak = max(peak, float(np.max(np.abs(g))))
        mean_error = max(mean_error, float(np.max(np.abs(total / draws - estimator.exact(iterate.state)))))
        squares /= draws
        if bounds.norm_kind is NormKind.EUCLIDEAN:
            moment = max(moment, float(squares.sum()))
        else:
            state = iterate.state
            own = state.y() if bounds.norm_kind is NormKind.LOCAL_SIMPLEX else state.s
            moment = max(moment, *(float(weights @ squares) for weights in (own, *iterate.weightings)))

    detail = f"{draws} draws x {len(iterates)} iterates"
    rows = [
        _row(f"estimator[{name}].mean", mean_error, 4.0 * math.sqrt(bounds.v / draws), detail),
        _row(f"estimator[{name}].second_moment", moment, MOMENT_SLACK * bounds.v, bounds.norm_kind.value, slack=0.0),
    ]
    if bounds.norm_kind is not NormKind.EUCLIDEAN:
        rows.append(_row(f"estimator[{name}].max_entry", peak, bounds.c))
    return rows


def _weightings(gen: np.random.Generator, dim: int, count: int = 4) -> Tuple[np.ndarray, ...]:
    return tuple(gen.dirichlet(np.ones(dim)) for _ in range(count))


def _iterates(
    gen: np.random.Generator, mdp: MdpInstance, M: float, count: int, slack_cap: Optional[float] = None
) -> List[Iterate]:
    # μ-estimator bounds are stated on the inner box ‖v‖∞ ≤ M.
    iterates = []
    for _ in range(count):
        s = None
        if slack_cap is not None:
            s = slack_cap * gen.dirichlet(np.ones(mdp.K + 1))[:-1]
        state = SmdState.frozen(gen.uniform(-M, M, mdp.n_states), gen.dirichlet(np.ones(mdp.n_pairs)), s)
        iterates.append(Iterate(state, _weightings(gen, mdp.n_pairs)))
    return iterates


def mdp_estimator_checks(
    mdp: MdpInstance, mode: str, t_mix: int, draws: int, seed: int, iterates: int = ITERATES
) -> List[CheckRow]:
    M = 2.0 * t_mix if mode == MIXING else 1.0 / (1.0 - mdp.gamma)
    cfg = MdpSaddleConfig(mode, M, 0.1)
    points = _iterates(RngState(seed, Stream.EVALUATION).generator, mdp, M, iterates)
    estimators = mdp_estimators(cfg, mdp, SampleCounter())
    return (
        estimator_checks(f"v_{mode}", estimators["x"], points, mdp.n_states, draws, seed)
        + estimator_checks(f"mu_{mode}", estimators["y"], points, mdp.n_pairs, draws, seed)
    )


def constrained_estimator_checks(mdp: MdpInstance, draws: int, seed: int, iterates: int = ITERATES) -> List[CheckRow]:
    cfg = constrained_config(mdp, 0.1)
    points = _iterates(RngState(seed, Stream.EVALUATION).generator, mdp, cfg.M, iterates, slack_cap=CAP)
    estimators = constrained_estimators(cfg, mdp, SampleCounter())
    return (
        estimator_checks("v_constrained", estimators["x"], points, mdp.n_states, draws, seed)
        + estimator_checks("s_constrained", estimators["s"], points, mdp.K, draws, seed)
        + estimator_checks("mu_constrained", estimators["y"], points, mdp.n_pairs, draws, seed)
    )


def game_estimator_checks(game: GameInstance, draws: int, seed: int, iterates: int = ITERATES) -> List[CheckRow]:
    gen = RngState(seed, Stream.EVALUATION).generator
    points = [
        Iterate(
            SmdState.frozen(gen.uniform(-game.radius, game.radius, game.n), gen.dirichlet(np.ones(game.m))),
            _weightings(gen, game.m),
        )
        for _ in range(iterates)
    ]
    counter = SampleCounter()
    return (
        estimator_checks("game_x", estimator_x_game(game, counter), points, game.n, draws, seed)
        + estimator_checks("game_y", estimator_y_game(game, counter), points, game.m, draws, seed)
    )


# ─────────────────────────────────────────────────────── gap checks

def gap_checks(name: str, problem, seed: int, trials: int = 20) -> List[CheckRow]:
    """Worst |closed form − vertex enumeration| and the smallest gap seen."""
    gen = RngState(seed, Stream.EVALUATION).generator
    worst = 0.0
    smallest = math.inf
    for _ in range(trials):
        x = gen.uniform(-problem.box.radius, problem.box.radius, problem.box.dim)
        y = gen.dirichlet(np.ones(problem.simplex.dim))
        s = None
        if problem.capped is not None:
            s = problem.capped.cap * gen.dirichlet(np.ones(problem.capped.dim + 1))[:-1]
        closed = problem.gap(x, y, s)
        worst = max(worst, abs(closed - vertex_gap(problem, x, y, s)))
        smallest = min(smallest, closed)
    return [
        _row(f"gap[{name}].closed_form", worst, GAP_TOL, f"{trials} random points"),
        _row(f"gap[{name}].nonnegative", -smallest, GAP_TOL),
    ]


# ─────────────────────────────────────────────────────── norm suite

def _suite_sizes(k: int, max_states: int) -> Tuple[int, List[int]]:
    S = 2 + k % (max_states - 1)
    return S, [2 + (k + i) % 2 for i in range(S)]


def norm_suite(
    seed: int = 0,
    n_instances: int = NORM_SUITE_INSTANCES,
    max_states: int = NORM_SUITE_MAX_STATES,
    policies: int = RANDOM_POLICIES,
) -> List[CheckRow]:
    """Inverse-norm bounds over a family of generated instances.

    Mixing instances are checked on every deterministic policy against
    2·t_mix of that policy's chain; discounted instances on ``policies``
    random stochastic policies against 1/(1−γ). Each row reports the worst
    norm/bound ratio, so the bound is 1.
    """
    if max_states < 2:
        raise ConfigError(f"max_states must be at least 2, got {max_states}")
    gen = RngState(seed, Stream.EVALUATION).generator
    mixing_worst, mixing_checked, skipped = 0.0, 0, 0
    discounted_worst, discounted_checked = 0.0, 0
    for k in range(n_instances):
        S, actions = _suite_sizes(k, max_states)
        instance_seed = seed * n_instances + k
        mdp = generate_instance("random_mixing", {"S": S, "actions": actions}, instance_seed)
        for policy in deterministic_policies(mdp):
            try:
                norms = verify_norm_bounds(mdp, policy, MIXING)
            except (NotMixing, NonUniqueStationary):
                skipped += 1
                continue
            mixing_worst = max(mixing_worst, norms.norm / norms.bound)
            mixing_checked += 1

        gamma = NORM_SUITE_GAMMAS[k % len(NORM_SUITE_GAMMAS)]
        dmdp = generate_instance("random_dmdp", {"S": S, "actions": actions, "gamma": gamma}, instance_seed)
        for _ in range(policies):
            norms = verify_norm_bounds(dmdp, _random_policy(dmdp, gen), DISCOUNTED)
            discounted_worst = max(discounted_worst, norms.norm / norms.bound)
            discounted_checked += 1
    logger.info(
        "norm suite: %d mixing policies (%d skipped), %d discounted policies",
        mixing_checked, skipped, discounted_checked,
    )

    rows = []
    if mixing_checked:
        detail = f"{n_instances} instances, {mixing_checked} policies"
        if skipped:
            detail += f", {skipped} not mixing"
        rows.append(_row("norms[mixing].inverse_norm", mixing_worst, 1.0, detail))
    else:
        rows.append(CheckRow("norms[mixing].inverse_norm", None, None, SKIP, "no mixing policy"))
    rows.append(
        _row(
            "norms[discounted].inverse_norm",
            discounted_worst,
            1.0,
            f"{n_instances} instances, {discounted_checked} policies",
        )
    )
    return rows


# ─────────────────────────────────────────────────────── suites

def verify_instance(
    mdp: MdpInstance, seed: int = 0, draws: int = DEFAULT_DRAWS, iterates: int = ITERATES
) -> VerificationReport:
    report = VerificationReport()
    t_mix: Optional[int] = None
    try:
        t_mix = mdp.t_mix or mixing_time(mdp)
    except (NotMixing, OracleTooLarge) as exc:
        logger.info("mixing checks skipped: %s", exc)

    report.extend(mixing_chain_checks(mdp))
    if t_mix is not None:
        cfg = MdpSaddleConfig(MIXING, 2.0 * t_mix, 0.1)
        report.extend(mdp_estimator_checks(mdp, MIXING, t_mix, draws, seed, iterates))
        report.extend(gap_checks("mixing", mdp_problem(cfg, mdp), seed))
        if mdp.D is not None:
            report.extend(constrained_estimator_checks(mdp.replace(t_mix=t_mix), draws, seed, iterates))
            report.extend(gap_checks("constrained", ConstrainedProblem(mdp, constrained_config(mdp, 0.1, t_mix)), seed))
    else:
        for name in ("v_mixing", "mu_mixing"):
            report.rows.append(CheckRow(f"estimator[{name}]", None, None, SKIP, "no mixing time"))

    if mdp.gamma is not None:
        report.extend(discounted_chain_checks(mdp, seed))
        if mdp.q is not None:
            cfg = MdpSaddleConfig(DISCOUNTED, 1.0 / (1.0 - mdp.gamma), 0.1)
            report.extend(mdp_estimator_checks(mdp, DISCOUNTED, 1, draws, seed, iterates))
            report.extend(gap_checks("discounted", mdp_problem(cfg, mdp), seed))
    return report


def builtin_game(seed: int) -> GameInstance:
    gen = RngState(seed, Stream.GENERATOR).generator
    return GameInstance(gen.uniform(-1.0, 1.0, (3, 2)), gen.uniform(-1.0, 1.0, 2), gen.uniform(-1.0, 1.0, 3))


def verify_builtin(seed: int = 0, draws: int = DEFAULT_DRAWS, iterates: int = ITERATES) -> VerificationReport:
    """The packaged suite.

    The norm suite over generated instances, then every check on one instance
    of each kind, then estimator and gap checks on a random game.
    """
    report = VerificationReport(norm_suite(seed))
    instances = {
        "mixing": generate_instance("random_mixing", {"S": 3, "actions": 2, "alpha": 0.5}, seed),
        "discounted": generate_instance("random_dmdp", {"S": 3, "actions": 2, "alpha": 0.5, "gamma": 0.9}, seed),
        "constrained": generate_instance(
            "constrained", {"S": 3, "actions": 2, "alpha": 0.5, "K": 2, "D_max": 1.0}, seed
        ),
    }
    for label, mdp in instances.items():
        logger.info("verifying builtin %s instance", label)
        try:
            rows = verify_instance(mdp, seed, draws, iterates).rows
            for row in rows:
                row.name = f"{label}:{row.name}"
            report.extend(rows)
        except MdpSmdError as exc:
            report.rows.append(CheckRow(f"builtin[{label}]", None, None, FAIL, str(exc)))
    game = builtin_game(seed)
    report.extend(game_estimator_checks(game, draws, seed, iterates))
    report.extend(gap_checks("game", game.problem(), seed))
    return report
