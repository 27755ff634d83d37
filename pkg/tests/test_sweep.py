"""
tests/test_sweep.py
~~~~~~~~~~~~~~~~~~~
Task dispatch, experiment specs and threaded sweeps.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from mdp_smd.exceptions import ConfigError, InstanceFormatError
from mdp_smd.framework import Checkpoint, SolveReport
from mdp_smd.solvers import GameInstance
from mdp_smd.sweep import CSV_HEADER, ExperimentSpec, SweepResult, SweepRow, fit_slope, run_sweep
from mdp_smd.tasks import load_instance, median, run_task, samples_to_target

from .conftest import bandit

SEEDS = list(range(10))


def _report(points) -> SolveReport:
    return SolveReport(
        mode="test",
        eps=0.1,
        seed=0,
        T=points[-1][0],
        samples=2 * points[-1][0],
        gap=points[-1][1],
        x=np.zeros(1),
        y=np.ones(1),
        checkpoints=[Checkpoint(t, 2 * t, gap, subopt) for t, gap, subopt in points],
    )


# ──────────────────────────────────────────────────────── tasks

class TestTasks:
    def test_unknown_task(self, symmetric_chain):
        with pytest.raises(ConfigError):
            run_task("pomdp", symmetric_chain, 0.1, 0)

    def test_mdp_task_needs_mdp(self, matching_pennies):
        with pytest.raises(ConfigError):
            run_task("amdp", matching_pennies, 0.1, 0, iterations=10)

    def test_game_task_needs_game(self, symmetric_chain):
        with pytest.raises(ConfigError):
            run_task("game", symmetric_chain, 0.1, 0, iterations=10)

    def test_load_by_task(self, demo_path, tmp_path):
        assert load_instance("amdp", demo_path).n_states == 5
        game_path = tmp_path / "game.json"
        GameInstance(np.eye(2), np.zeros(2), np.zeros(2)).save(game_path)
        assert load_instance("game", game_path).m == 2

    def test_dispatch_records_task(self, demo_mdp):
        report = run_task("amdp", demo_mdp, 0.5, 0, iterations=50)
        assert report.extra["task"] == "amdp"
        assert report.mode == "mixing"

    def test_regression_task(self):
        game = GameInstance(np.array([[1.0]]), np.zeros(1), np.array([2.0]))
        report = run_task("regression", game, 0.2, 0, iterations=200)
        assert report.mode == "regression"
        assert "certified_gap" in report.extra

    def test_samples_to_target_prefers_subopt(self):
        report = _report([(10, 0.9, 0.5), (20, 0.5, 0.05), (40, 0.05, 0.01)])
        assert samples_to_target(report, 0.1) == 40

    def test_samples_to_target_falls_back_to_gap(self):
        report = _report([(10, 0.9, None), (20, 0.08, None)])
        assert samples_to_target(report, 0.1) == 40

    def test_samples_to_target_never_reached(self):
        assert samples_to_target(_report([(10, 0.9, None)]), 0.1) is None

    def test_median_ignores_missing(self):
        assert median([None, 3, 1, None, 2]) == 2.0
        assert median([None]) is None


# ──────────────────────────────────────────────────────── spec

class TestExperimentSpec:
    def _spec(self, **overrides) -> ExperimentSpec:
        data = {"task": "amdp", "eps": [0.4, 0.2, 0.1], "seeds": SEEDS, "instance": "inst.json"}
        data.update(overrides)
        return ExperimentSpec(**data)

    def test_valid(self):
        spec = self._spec()
        spec.check_sweepable()
        assert spec.eps == [0.4, 0.2, 0.1]

    def test_eps_range(self):
        with pytest.raises(ConfigError):
            self._spec(eps=[0.4, 1.0, 0.1])

    def test_distinct_seeds(self):
        with pytest.raises(ConfigError):
            self._spec(seeds=[0, 0, 1])

    def test_exactly_one_source(self):
        with pytest.raises(ConfigError):
            self._spec(generator={"kind": "random_mixing", "params": {"S": 2}})
        with pytest.raises(ConfigError):
            self._spec(instance=None)

    def test_too_few_cells(self):
        with pytest.raises(ConfigError):
            self._spec(eps=[0.4, 0.2]).check_sweepable()
        with pytest.raises(ConfigError):
            self._spec(seeds=[0, 1, 2]).check_sweepable()

    def test_unknown_field(self, tmp_json):
        path = tmp_json("spec.json", {"task": "amdp", "eps": [0.1], "seeds": [0], "instance": "x", "colour": 1})
        with pytest.raises(InstanceFormatError):
            ExperimentSpec.load(path)

    def test_generator_instance(self):
        spec = self._spec(instance=None, generator={"kind": "random_mixing", "params": {"S": 3}, "seed": 4})
        mdp = spec.build_instance()
        assert mdp.n_states == 3
        assert mdp.t_mix is not None


# ──────────────────────────────────────────────────────── sweeps

class TestFitSlope:
    def test_inverse_square(self):
        assert fit_slope({0.1: 10_000.0, 0.2: 2_500.0, 0.4: 625.0}) == pytest.approx(-2.0)

    def test_missing_medians(self):
        assert fit_slope({0.1: None, 0.2: 100.0}) is None


class TestSweepResult:
    def test_csv_layout(self):
        result = SweepResult(
            [SweepRow("amdp", 0.1, 0, 100, 80, 0.05, 0.01), SweepRow("amdp", 0.2, 0, 50, None, 0.3, None)],
            slope=-2.0,
        )
        lines = result.csv_text().splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert lines[1] == "amdp,0.1,0,100,80,0.05,0.01"
        assert lines[2] == "amdp,0.2,0,50,,0.3,"
        assert lines[-1] == "summary,,,,-2.0,,"

    def test_medians_by_eps(self):
        rows = [SweepRow("amdp", 0.1, s, 10, v, 0.0, None) for s, v in enumerate([10, 30, None])]
        assert SweepResult(rows).medians() == {0.1: 20.0}


class TestRunSweep:
    def _spec(self, path) -> ExperimentSpec:
        return ExperimentSpec(task="amdp", eps=[0.5, 0.3, 0.2], seeds=SEEDS, instance=str(path), iterations=400)

    def test_rows_in_spec_order(self, tmp_path):
        path = tmp_path / "bandit.json"
        bandit().save(path)
        result = run_sweep(self._spec(path), threads=4)
        assert [(row.eps, row.seed) for row in result.rows] == [(e, s) for e in (0.5, 0.3, 0.2) for s in SEEDS]
        assert all(row.T == 400 for row in result.rows)
        assert result.csv_text().splitlines()[-1].startswith("summary,")

    def test_thread_count_does_not_change_output(self, tmp_path):
        path = tmp_path / "bandit.json"
        bandit().save(path)
        one = run_sweep(self._spec(path), threads=1).csv_text()
        many = run_sweep(self._spec(path), threads=3).csv_text()
        assert one == many

    def test_slope_is_finite_or_missing(self, demo_mdp, tmp_path):
        path = tmp_path / "demo.json"
        demo_mdp.save(path)
        result = run_sweep(self._spec(path), threads=2, instance=demo_mdp)
        assert result.slope is None or math.isfinite(result.slope)
