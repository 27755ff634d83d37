"""
tests/conftest.py
~~~~~~~~~~~~~~~~~
Shared pytest fixtures.

Instances here are tiny and hand-checkable: the two-state symmetric chain,
a one-state bandit, matching pennies and the packaged five-state demo.
Solver tests override the iteration budget; runs at the full budget are
marked ``slow``.
"""

from __future__ import annotations

import math
import os
from pathlib import Path

import numpy as np
import pytest

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings")

from mdp_smd.mdp import MdpInstance  # noqa: E402
from mdp_smd.sampling import RngState  # noqa: E402
from mdp_smd.solvers.game import GameInstance  # noqa: E402

DEMO_INSTANCE = Path(__file__).resolve().parent.parent / "mdp_smd" / "fixtures" / "demo_mixing.json"


# ──────────────────────────────────────────────────────────── MDP builders

def two_state_chain(delta: float = 0.5, rewards=(1.0, 0.0), gamma=None, q=None) -> MdpInstance:
    """Single-action chain [[1−δ, δ], [δ, 1−δ]]."""
    return MdpInstance(
        n_states=2,
        actions=[1, 1],
        transitions=[[1.0 - delta, delta], [delta, 1.0 - delta]],
        rewards=list(rewards),
        gamma=gamma,
        q=q,
    )


def bandit(rewards=(0.0, 1.0), D=None) -> MdpInstance:
    """One state, one self-loop per action."""
    k = len(rewards)
    return MdpInstance(
        n_states=1,
        actions=[k],
        transitions=[[1.0]] * k,
        rewards=list(rewards),
        D=D,
    )


def periodic_chain() -> MdpInstance:
    return MdpInstance(n_states=2, actions=[1, 1], transitions=[[0.0, 1.0], [1.0, 0.0]], rewards=[1.0, 0.0])


# ──────────────────────────────────────────────────────────── estimator helpers

def mean_error(estimator, state, dim: int, draws: int, seed: int = 0) -> float:
    """Largest componentwise gap between the empirical and the exact mean."""
    rng = RngState(seed)
    total = np.zeros(dim)
    for _ in range(draws):
        total += estimator.draw(state, rng).dense(dim)
    return float(np.max(np.abs(total / draws - estimator.exact(state))))


def unbiased_band(estimator, draws: int) -> float:
    """4·√(v/N) for the estimator's declared second-moment bound v."""
    return 4.0 * math.sqrt(estimator.bounds.v / draws)


# ──────────────────────────────────────────────────────────── fixtures

@pytest.fixture
def symmetric_chain() -> MdpInstance:
    return two_state_chain()


@pytest.fixture
def discounted_chain() -> MdpInstance:
    return two_state_chain(gamma=0.5, q=[1.0, 0.0])


@pytest.fixture
def demo_mdp() -> MdpInstance:
    return MdpInstance.load(DEMO_INSTANCE)


@pytest.fixture
def demo_path() -> Path:
    return DEMO_INSTANCE


@pytest.fixture
def matching_pennies() -> GameInstance:
    return GameInstance(np.array([[1.0, -1.0], [-1.0, 1.0]]), np.zeros(2), np.zeros(2))


@pytest.fixture
def tmp_json(tmp_path):
    """Write a dict to a JSON file and return its path."""
    import json

    def _write(name: str, data) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write
