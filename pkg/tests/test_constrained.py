"""
tests/test_constrained.py
~~~~~~~~~~~~~~~~~~~~~~~~~
Constrained mixing MDPs: estimators, closed-form gap, LP oracle and solve.
"""

from __future__ import annotations

import logging

import numpy as np
import pytest

from mdp_smd.exceptions import ConfigError, DomainError, InfeasibleInstance
from mdp_smd.framework import SampleCounter, SmdState, vertex_gap
from mdp_smd.mdp import Policy, generate_instance
from mdp_smd.sampling import RngState
from mdp_smd.solvers import (
    ConstrainedProblem,
    constrained_saddle_oracle,
    exact_constrained_gap,
    solve_constrained,
    violation_metrics,
)
from mdp_smd.solvers.constrained import (
    CAP,
    MuConstrained,
    SConstrained,
    VConstrained,
    check_feasible,
    constrained_config,
)

from .conftest import bandit, mean_error, two_state_chain, unbiased_band


def _constrained_instance(seed: int = 5, S: int = 3, K: int = 2):
    return generate_instance("constrained", {"S": S, "actions": 2, "K": K}, seed)


def _chain_with_costs(D):
    return two_state_chain().replace(D=np.asarray(D, dtype=float))


# ──────────────────────────────────────────────────────── configuration

class TestConstrainedConfig:
    def test_horizon_scales_with_cost(self):
        cfg = constrained_config(bandit(D=[[2.0], [0.0]]), 0.1)
        assert cfg.t_mix == 1
        assert cfg.D_max == 2.0
        assert cfg.M == 4.0
        assert cfg.radius == 8.0

    def test_explicit_mixing_time(self):
        assert constrained_config(bandit(D=[[1.0], [1.0]]), 0.1, t_mix=3).M == 6.0

    def test_needs_costs(self, symmetric_chain):
        with pytest.raises(ConfigError):
            constrained_config(symmetric_chain, 0.1)


# ──────────────────────────────────────────────────────── estimators

class TestSConstrained:
    def test_zero_costs(self):
        mdp = _chain_with_costs([[0.0], [0.0]])
        estimator = SConstrained(mdp)
        state = SmdState.frozen([0.0, 0.0], [0.5, 0.5], s=[0.0])
        assert estimator.exact(state).tolist() == [-1.0]
        assert estimator.draw(state, RngState(0)).dense(1).tolist() == [-1.0]

    def test_constant_cost(self):
        mdp = _chain_with_costs([[1.75], [1.75]])
        state = SmdState.frozen([0.0, 0.0], [0.3, 0.7], s=[1.0])
        assert SConstrained(mdp).exact(state) == pytest.approx([0.75])
        assert SConstrained(mdp).draw(state, RngState(1)).dense(1) == pytest.approx([0.75])

    def test_empirical_mean(self):
        mdp = _constrained_instance()
        estimator = SConstrained(mdp, SampleCounter())
        state = SmdState.frozen(np.zeros(3), np.linspace(1.0, 3.0, 6), s=[0.5, 0.5])
        assert mean_error(estimator, state, 2, 40_000, seed=2) <= unbiased_band(estimator, 40_000)

    def test_draws_no_generative_samples(self):
        counter = SampleCounter()
        estimator = SConstrained(_chain_with_costs([[1.0], [1.0]]), counter)
        estimator.draw(SmdState.frozen([0.0, 0.0], [0.5, 0.5], s=[1.0]), RngState(0))
        assert counter.count == 0


class TestVConstrained:
    def test_exact_mean_vanishes_on_stationary_occupancy(self):
        mdp = _chain_with_costs([[1.0], [1.0]])
        state = SmdState.frozen([0.0, 0.0], [0.5, 0.5], s=[0.0])
        assert VConstrained(mdp).exact(state) == pytest.approx([0.0, 0.0])

    def test_empirical_mean(self):
        mdp = _constrained_instance()
        estimator = VConstrained(mdp, SampleCounter())
        state = SmdState.frozen(np.zeros(3), np.linspace(1.0, 2.0, 6), s=[0.0, 0.0])
        assert mean_error(estimator, state, 3, 20_000, seed=3) <= unbiased_band(estimator, 20_000)


class TestMuConstrained:
    def test_zero_point(self):
        mdp = _chain_with_costs([[1.0], [2.0]])
        estimator = MuConstrained(mdp, 2.0)
        state = SmdState.frozen([0.0, 0.0], [0.5, 0.5], s=[0.0])
        assert estimator.exact(state).tolist() == [0.0, 0.0]
        assert estimator.draw(state, RngState(0)).dense(2).tolist() == [0.0, 0.0]

    def test_empirical_mean(self):
        mdp = _constrained_instance()
        cfg = constrained_config(mdp, 0.1)
        estimator = MuConstrained(mdp, cfg.M, SampleCounter())
        state = SmdState.frozen([0.2, -0.2, 0.1], np.full(6, 1 / 6), s=[0.2, 0.3])
        assert mean_error(estimator, state, 6, 40_000, seed=4) <= unbiased_band(estimator, 40_000)


# ──────────────────────────────────────────────────────── gap and oracle

class TestConstrainedGap:
    def test_zero_costs_at_origin(self):
        mdp = _chain_with_costs([[0.0], [0.0]])
        cfg = constrained_config(mdp, 0.1)
        assert exact_constrained_gap(cfg, mdp, [0.0, 0.0], [0.0], [0.5, 0.5]) == pytest.approx(2.0)

    def test_closed_form_matches_vertices(self):
        mdp = _constrained_instance()
        cfg = constrained_config(mdp, 0.1)
        problem = ConstrainedProblem(mdp, cfg)
        gen = np.random.default_rng(6)
        for _ in range(5):
            v = gen.uniform(-cfg.radius, cfg.radius, 3)
            s = gen.dirichlet(np.ones(3))[:2] * CAP
            mu = gen.dirichlet(np.ones(6))
            assert exact_constrained_gap(cfg, mdp, v, s, mu) == pytest.approx(
                vertex_gap(problem, v, mu, s), abs=1e-9
            )

    def test_slack_outside_cap_rejected(self):
        mdp = _chain_with_costs([[1.0], [1.0]])
        cfg = constrained_config(mdp, 0.1)
        with pytest.raises(DomainError):
            exact_constrained_gap(cfg, mdp, [0.0, 0.0], [2.5], [0.5, 0.5])

    def test_lp_oracle_is_a_saddle_point(self):
        mdp = _constrained_instance(seed=9)
        cfg = constrained_config(mdp, 0.1)
        saddle = constrained_saddle_oracle(mdp, cfg)
        problem = ConstrainedProblem(mdp, cfg)
        assert problem.gap(saddle.v, saddle.mu, saddle.s) <= 1e-6
        assert saddle.mu.sum() == pytest.approx(1.0)


class TestFeasibility:
    def test_strict_margin(self):
        assert check_feasible(bandit(D=[[2.0], [0.0]])) == pytest.approx(2.0)

    def test_boundary_warns(self, caplog):
        with caplog.at_level(logging.WARNING, logger="mdp_smd.solvers.constrained"):
            assert check_feasible(bandit(D=[[1.0], [1.0]])) == pytest.approx(1.0)
        assert "not strictly feasible" in caplog.text

    def test_infeasible(self):
        with pytest.raises(InfeasibleInstance):
            check_feasible(bandit(D=[[0.5], [0.5]]))

    def test_violation_metrics(self):
        mdp = bandit(D=[[2.0], [0.0]])
        metrics = violation_metrics(mdp, Policy([[0.25, 0.75]]))
        assert metrics["min_Dmu"] == pytest.approx(0.5)
        assert metrics["stationarity_l1"] == pytest.approx(0.0)


# ──────────────────────────────────────────────────────── solve

class TestSolveConstrained:
    def test_bandit_meets_constraint(self):
        # Only the costly action's weight ever moves, and it moves up.
        report, policy = solve_constrained(bandit(D=[[2.0], [0.0]]), eps=0.2, seed=1, iterations=2_000)
        assert policy.rows[0][0] >= 0.5
        assert report.extra["min_Dmu"] >= 1.0
        assert report.samples == 2 * report.T

    def test_unit_costs(self):
        report, _ = solve_constrained(bandit(D=[[1.0], [1.0]]), eps=0.2, seed=2, iterations=500)
        assert report.extra["min_Dmu"] == pytest.approx(1.0)
        assert report.extra["margin"] == pytest.approx(1.0)

    def test_infeasible_instance(self):
        with pytest.raises(InfeasibleInstance):
            solve_constrained(bandit(D=[[0.5], [0.5]]), eps=0.2, seed=0, iterations=10)

    def test_generated_instance(self):
        mdp = _constrained_instance(seed=3, S=4, K=2)
        report, policy = solve_constrained(mdp, eps=0.3, seed=5, iterations=3_000, checkpoints=4)
        policy.validate(mdp)
        assert report.mode == "constrained"
        assert report.s is not None and report.s.sum() <= CAP + 1e-9
        assert report.extra["stationarity_l1"] <= 1e-9
        assert report.checkpoints[-1].t == 3_000
        assert all(c.gap >= -1e-9 for c in report.checkpoints)

    def test_seeded_runs_are_identical(self):
        mdp = _constrained_instance(seed=3)
        a, _ = solve_constrained(mdp, eps=0.3, seed=8, iterations=500)
        b, _ = solve_constrained(mdp, eps=0.3, seed=8, iterations=500)
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(a.s, b.s)

    @pytest.mark.slow
    def test_full_budget_violation(self):
        mdp = _constrained_instance(seed=3, S=3, K=1)
        eps = 0.5
        report, _ = solve_constrained(mdp, eps=eps, seed=1)
        assert report.extra["min_Dmu"] >= 1.0 - eps
