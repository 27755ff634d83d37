"""
tests/test_mdp_core.py
~~~~~~~~~~~~~~~~~~~~~~
Instances, policies, generative sampling, generators and exact oracles.
"""

from __future__ import annotations

import json

import numpy as np
import pytest

from mdp_smd.exceptions import (
    ConfigError,
    DomainError,
    InstanceFormatError,
    NonUniqueStationary,
    NotMixing,
    OracleTooLarge,
)
from mdp_smd.framework import SampleCounter
from mdp_smd.mdp import (
    DISCOUNTED,
    MIXING,
    GenerativeModel,
    MdpInstance,
    Policy,
    chain_mixing_time,
    evaluate_policy,
    evaluation_report,
    feasibility_margin,
    generate_instance,
    generative_sample,
    induced_chain,
    mixing_time,
    normalize_costs,
    occupancy,
    optimal_oracle,
    power_decay_check,
    stationary_distribution,
    verify_norm_bounds,
)
from mdp_smd.mdp.oracles import deterministic_policies, enumerate_optimal_discounted
from mdp_smd.sampling import RngState

from .conftest import bandit, periodic_chain, two_state_chain


def _lazy_chain(delta: float) -> np.ndarray:
    return np.array([[1.0 - delta, delta], [delta, 1.0 - delta]])


# ──────────────────────────────────────────────────────── instances

class TestMdpInstance:
    def test_pair_indexing(self):
        mdp = MdpInstance(
            n_states=2,
            actions=[1, 2],
            transitions=[[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]],
            rewards=[0.1, 0.2, 0.3],
        )
        assert mdp.n_pairs == 3
        assert mdp.row(1, 1) == 2
        assert mdp.pair(2) == (1, 1)
        assert mdp.state_of.tolist() == [0, 1, 1]
        assert mdp.I_hat.tolist() == [[1.0, 0.0], [0.0, 1.0], [0.0, 1.0]]

    def test_invalid_pair(self, symmetric_chain):
        with pytest.raises(DomainError):
            symmetric_chain.row(0, 1)

    def test_rows_must_be_stochastic(self):
        with pytest.raises(InstanceFormatError):
            MdpInstance(n_states=2, actions=[1, 1], transitions=[[0.5, 0.4], [0.5, 0.5]], rewards=[0, 0])

    def test_rewards_in_unit_interval(self):
        with pytest.raises(InstanceFormatError):
            bandit(rewards=(0.0, 1.5))

    def test_gamma_range(self):
        with pytest.raises(InstanceFormatError):
            two_state_chain(gamma=1.0)

    def test_negative_costs_rejected(self):
        with pytest.raises(InstanceFormatError):
            bandit(D=[[1.0], [-1.0]])

    def test_file_round_trip(self, tmp_path):
        mdp = generate_instance("constrained", {"S": 2, "actions": 2, "K": 1}, 3)
        path = tmp_path / "inst.json"
        mdp.save(path)
        loaded = MdpInstance.load(path)
        assert loaded.to_dict() == mdp.to_dict()
        assert loaded.feasibility_checked is True

    def test_wrong_format_tag(self, tmp_json):
        path = tmp_json("bad.json", {"format": "other", "S": 1})
        with pytest.raises(InstanceFormatError):
            MdpInstance.load(path)

    def test_missing_field(self, tmp_json):
        path = tmp_json("bad.json", {"format": "mdp-smd/v1", "S": 1, "actions": [1]})
        with pytest.raises(InstanceFormatError, match="transitions"):
            MdpInstance.load(path)

    def test_demo_fixture(self, demo_mdp):
        assert demo_mdp.n_states == 5
        assert demo_mdp.n_pairs == 15
        assert demo_mdp.t_mix == 1


class TestPolicy:
    def test_deterministic(self, demo_mdp):
        pi = Policy.deterministic(demo_mdp, [0, 1, 2, 0, 1])
        assert pi.is_deterministic
        assert pi.matrix(demo_mdp).sum(axis=1).tolist() == [1.0] * 5

    def test_validation(self, symmetric_chain):
        with pytest.raises(DomainError):
            Policy([[0.5, 0.5], [1.0]]).validate(symmetric_chain)
        with pytest.raises(DomainError):
            Policy([[0.7], [1.0]]).validate(symmetric_chain)

    def test_load_from_report(self, tmp_json):
        path = tmp_json("report.json", {"mode": "mixing", "policy": [[0.25, 0.75]]})
        assert Policy.load(path).to_list() == [[0.25, 0.75]]

    def test_load_without_policy(self, tmp_json):
        with pytest.raises(InstanceFormatError):
            Policy.load(tmp_json("report.json", {"mode": "mixing"}))


class TestGenerativeSample:
    def test_deterministic_row(self):
        mdp = MdpInstance(n_states=3, actions=[1, 1, 1], transitions=np.eye(3)[[2, 0, 1]], rewards=[0, 0, 0])
        rng = RngState(0)
        assert {generative_sample(mdp, 0, 0, rng) for _ in range(100)} == {2}

    def test_frequency_and_counter(self, symmetric_chain):
        counter = SampleCounter()
        model = GenerativeModel(symmetric_chain, counter)
        rng = RngState(1)
        draws = [model.sample(0, 0, rng) for _ in range(100_000)]
        assert abs(np.mean(draws) - 0.5) <= 4 * np.sqrt(0.25 / 100_000)
        assert counter.count == 100_000

    def test_models_without_counter_count_separately(self, symmetric_chain):
        first, second = GenerativeModel(symmetric_chain), GenerativeModel(symmetric_chain)
        rng = RngState(2)
        for _ in range(5):
            first.sample(0, 0, rng)
        second.sample(1, 0, rng)
        assert first.counter is not second.counter
        assert (first.counter.count, second.counter.count) == (5, 1)

    def test_uncounted_draws_touch_no_counter(self, symmetric_chain):
        counter = SampleCounter()
        model = GenerativeModel(symmetric_chain, counter)
        rng = RngState(3)
        for _ in range(10):
            generative_sample(symmetric_chain, 0, 0, rng)
        generative_sample(symmetric_chain, 1, 0, rng, counter=counter)
        assert counter.count == 1
        assert model.counter is counter

    def test_invalid_pair(self, symmetric_chain):
        with pytest.raises(DomainError):
            generative_sample(symmetric_chain, 2, 0, RngState(0))


# ──────────────────────────────────────────────────────── chains

class TestInducedChain:
    def test_single_action_copies_rows(self, symmetric_chain):
        Ppi, rpi = induced_chain(symmetric_chain, Policy.uniform(symmetric_chain))
        assert Ppi.tolist() == symmetric_chain.transitions.tolist()
        assert rpi.tolist() == [1.0, 0.0]

    def test_mixed_rewards(self):
        _, rpi = induced_chain(bandit(), Policy([[0.5, 0.5]]))
        assert rpi.tolist() == [0.5]

    def test_deterministic_selection(self, demo_mdp):
        choices = [2, 0, 1, 1, 0]
        Ppi, _ = induced_chain(demo_mdp, Policy.deterministic(demo_mdp, choices))
        for i, a in enumerate(choices):
            assert Ppi[i].tolist() == demo_mdp.transitions[demo_mdp.row(i, a)].tolist()


class TestStationaryDistribution:
    def test_symmetric(self):
        assert stationary_distribution(_lazy_chain(0.5)) == pytest.approx([0.5, 0.5])

    def test_periodic_chain_still_unique(self):
        assert stationary_distribution([[0.0, 1.0], [1.0, 0.0]]) == pytest.approx([0.5, 0.5])

    def test_asymmetric(self):
        assert stationary_distribution([[0.5, 0.5], [0.2, 0.8]]) == pytest.approx([2 / 7, 5 / 7])

    def test_reducible_chain(self):
        with pytest.raises(NonUniqueStationary):
            stationary_distribution(np.eye(2))

    def test_occupancy_sums_to_one(self, demo_mdp):
        mu = occupancy(demo_mdp, Policy.uniform(demo_mdp))
        assert mu.sum() == pytest.approx(1.0)
        assert np.abs((demo_mdp.I_hat - demo_mdp.transitions).T @ mu).sum() <= 1e-9


class TestEvaluatePolicy:
    def test_average_reward(self, symmetric_chain):
        evaluation = evaluate_policy(symmetric_chain, Policy.uniform(symmetric_chain), MIXING)
        assert evaluation.v_bar == pytest.approx(0.5)
        assert evaluation.stationary @ evaluation.values == pytest.approx(0.0, abs=1e-12)

    def test_discounted(self, discounted_chain):
        evaluation = evaluate_policy(discounted_chain, Policy.uniform(discounted_chain), DISCOUNTED)
        assert evaluation.values == pytest.approx([1.5, 0.5])
        assert evaluation.v_bar == pytest.approx(1.5)

    def test_zero_rewards(self, demo_mdp):
        mdp = demo_mdp.replace(rewards=np.zeros(demo_mdp.n_pairs))
        assert evaluate_policy(mdp, Policy.uniform(mdp)).v_bar == pytest.approx(0.0, abs=1e-12)

    def test_mode_follows_gamma(self, discounted_chain, symmetric_chain):
        assert evaluate_policy(discounted_chain, Policy.uniform(discounted_chain)).mode == DISCOUNTED
        assert evaluate_policy(symmetric_chain, Policy.uniform(symmetric_chain)).mode == MIXING

    def test_discounted_needs_gamma(self, symmetric_chain):
        with pytest.raises(ConfigError):
            evaluate_policy(symmetric_chain, Policy.uniform(symmetric_chain), DISCOUNTED)


# ──────────────────────────────────────────────────────── optimal policies

class TestOptimalOracle:
    def test_bandit_picks_rewarding_action(self):
        optimum = optimal_oracle(bandit())
        assert optimum.v_bar == pytest.approx(1.0)
        assert optimum.policy.to_list() == [[0.0, 1.0]]

    def test_single_policy_chain(self, symmetric_chain):
        assert optimal_oracle(symmetric_chain).v_bar == pytest.approx(0.5)

    def test_bias_solves_optimality_equation(self, demo_mdp):
        optimum = optimal_oracle(demo_mdp)
        q_values = demo_mdp.rewards + demo_mdp.transitions @ optimum.values
        best = np.maximum.reduceat(q_values, demo_mdp.offsets)
        assert best - optimum.v_bar == pytest.approx(optimum.values, abs=1e-9)

    def test_enumeration_beats_every_policy(self, demo_mdp):
        optimum = optimal_oracle(demo_mdp)
        for pi in deterministic_policies(demo_mdp):
            assert evaluate_policy(demo_mdp, pi).v_bar <= optimum.v_bar + 1e-12

    def test_value_iteration_agrees_with_enumeration(self):
        mdp = generate_instance("random_dmdp", {"S": 5, "actions": 3, "gamma": 0.9}, 11)
        assert optimal_oracle(mdp).v_bar == pytest.approx(enumerate_optimal_discounted(mdp).v_bar, abs=1e-7)

    def test_policy_iteration_fallback(self, settings, demo_mdp):
        expected = optimal_oracle(demo_mdp).v_bar
        settings.MDP_SMD = {"ORACLE_MAX_STATES": 2}
        assert optimal_oracle(demo_mdp).v_bar == pytest.approx(expected, abs=1e-9)

    def test_too_large(self, settings, demo_mdp):
        settings.MDP_SMD = {"ORACLE_MAX_STATES": 2, "POLICY_ITERATION_MAX_STATES": 3}
        with pytest.raises(OracleTooLarge):
            optimal_oracle(demo_mdp)


# ──────────────────────────────────────────────────────── mixing times

class TestMixingTime:
    def test_one_step_chain(self):
        assert chain_mixing_time(_lazy_chain(0.5)) == 1

    def test_lazy_chain_needs_two_steps(self):
        # ℓ1 distance (1 − 2δ)^t: 0.6 then 0.36.
        assert chain_mixing_time(_lazy_chain(0.2)) == 2

    def test_boundary_counts_as_mixed(self):
        assert chain_mixing_time(_lazy_chain(0.25)) == 1

    def test_periodic_chain(self):
        with pytest.raises(NotMixing):
            chain_mixing_time([[0.0, 1.0], [1.0, 0.0]], max_steps=50)

    def test_instance_maximum(self, demo_mdp):
        assert mixing_time(demo_mdp) == 1

    def test_uniform_rows(self):
        mdp = generate_instance("random_mixing", {"S": 3, "actions": 2, "alpha": 1.0}, 0)
        assert mdp.t_mix == 1


class TestNormBounds:
    def test_symmetric_chain(self, symmetric_chain):
        report = verify_norm_bounds(symmetric_chain, Policy.uniform(symmetric_chain), MIXING)
        assert report.norm == pytest.approx(1.0)
        assert report.bound == 2.0
        assert report.passed

    def test_discounted_bound_is_tight(self):
        mdp = two_state_chain(gamma=0.5, q=[0.5, 0.5])
        report = verify_norm_bounds(mdp, Policy.uniform(mdp), DISCOUNTED)
        assert report.norm == pytest.approx(2.0)
        assert report.passed

    def test_lazy_chain(self):
        mdp = two_state_chain(delta=0.2)
        report = verify_norm_bounds(mdp, Policy.uniform(mdp), MIXING)
        assert report.t_mix == 2
        assert report.norm <= 4.0

    def test_every_demo_policy(self, demo_mdp):
        for pi in deterministic_policies(demo_mdp):
            assert verify_norm_bounds(demo_mdp, pi, MIXING, demo_mdp.t_mix).passed

    def test_power_decay(self):
        for delta in (0.05, 0.2, 0.5):
            assert power_decay_check(_lazy_chain(delta)).passed

    def test_evaluation_report(self, demo_mdp):
        report = evaluation_report(demo_mdp, Policy.uniform(demo_mdp))
        assert report["mode"] == MIXING
        assert report["subopt"] >= -1e-12
        assert report["norms"]["passed"]
        json.dumps(report)


# ──────────────────────────────────────────────────────── generators

class TestGenerateInstance:
    def test_deterministic(self):
        params = {"S": 4, "actions": [2, 3, 1, 2], "alpha": 0.3}
        a = generate_instance("random_mixing", params, 5)
        b = generate_instance("random_mixing", params, 5)
        assert a.to_json() == b.to_json()

    def test_records_mixing_time(self):
        mdp = generate_instance("random_mixing", {"S": 5, "actions": 3, "alpha": 0.3}, 7)
        assert mdp.t_mix is not None and 1 <= mdp.t_mix <= 20

    def test_discounted_has_uniform_q(self):
        mdp = generate_instance("random_dmdp", {"S": 3, "gamma": 0.8}, 1)
        assert mdp.gamma == 0.8
        assert mdp.q.tolist() == pytest.approx([1 / 3] * 3)

    def test_constrained_is_strictly_feasible(self):
        mdp = generate_instance("constrained", {"S": 4, "actions": 2, "K": 2, "D_max": 1.0}, 2)
        tau, mu = feasibility_margin(mdp)
        assert tau > 1.0
        assert np.all(mdp.D.T @ mu >= tau - 1e-7)
        assert mdp.feasibility_checked

    def test_normalize_costs(self):
        D = normalize_costs(np.array([[1.0, 2.0], [3.0, 0.0]]), np.array([0.5, 0.5]), fraction=0.8)
        assert D.T @ np.array([0.5, 0.5]) == pytest.approx([1.25, 1.25])

    @pytest.mark.parametrize(
        "kind,params",
        [
            ("random_walk", {"S": 2}),
            ("random_mixing", {"S": 0}),
            ("random_mixing", {"S": 2, "alpha": 0.0}),
            ("random_dmdp", {"S": 2, "gamma": 1.0}),
            ("constrained", {"S": 2, "K": 0}),
        ],
    )
    def test_invalid_params(self, kind, params):
        with pytest.raises(ConfigError):
            generate_instance(kind, params, 0)

    def test_feasibility_margin_of_bandit(self):
        tau, _ = feasibility_margin(bandit(D=[[2.0], [0.0]]))
        assert tau == pytest.approx(2.0)

    def test_feasibility_margin_needs_costs(self, symmetric_chain):
        with pytest.raises(ConfigError):
            feasibility_margin(symmetric_chain)


def test_periodic_chain_optimum_still_defined():
    assert optimal_oracle(periodic_chain()).v_bar == pytest.approx(0.5)
