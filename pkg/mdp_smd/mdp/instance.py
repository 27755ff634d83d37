"""
mdp_smd.mdp.instance
~~~~~~~~~~~~~~~~~~~~
MDP instances, policies and generative-model access.

State-action pairs are flattened in state-major order: row ``r`` of the
transition matrix belongs to state ``state_of[r]`` and local action
``r − offsets[state_of[r]]``. Vectors indexed by pairs (μ, r, rows of P)
use this order throughout.

Instance file (``mdp-smd/v1``)::

    {"format": "mdp-smd/v1", "S": 2, "actions": [1, 2],
     "transitions": [[...], [...], [...]], "rewards": [...],
     "gamma": null, "q": null, "D": null,
     "t_mix": 1, "feasibility_checked": false}

``t_mix`` and ``feasibility_checked`` are optional metadata written by the
generators.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import DomainError, InstanceFormatError
from ..framework.estimators import SampleCounter
from ..sampling import AliasTable, RngState

logger = logging.getLogger("mdp_smd.mdp.instance")

FORMAT = "mdp-smd/v1"
POLICY_FORMAT = "mdp-smd/policy-v1"
ROW_TOL = 1e-9


@dataclass(eq=False)
class MdpInstance:
    n_states: int
    actions: Tuple[int, ...]
    transitions: np.ndarray
    rewards: np.ndarray
    gamma: Optional[float] = None
    q: Optional[np.ndarray] = None
    D: Optional[np.ndarray] = None
    t_mix: Optional[int] = None
    feasibility_checked: bool = False

    def __post_init__(self) -> None:
        self.actions = tuple(int(a) for a in self.actions)
        S = int(self.n_states)
        self.n_states = S
        if S < 1:
            raise InstanceFormatError("an instance needs at least one state")
        if len(self.actions) != S or any(a < 1 for a in self.actions):
            raise InstanceFormatError(f"actions must list a positive count for each of the {S} states")
        A = sum(self.actions)

        P = np.asarray(self.transitions, dtype=np.float64)
        if P.shape != (A, S):
            raise InstanceFormatError(f"transitions must be {A}x{S} (one row per state-action), got {P.shape}")
        if not np.all(np.isfinite(P)) or np.any(P < 0):
            raise InstanceFormatError("transition probabilities must be finite and nonnegative")
        bad = np.flatnonzero(np.abs(P.sum(axis=1) - 1.0) > ROW_TOL)
        if bad.size:
            raise InstanceFormatError(f"transition row {int(bad[0])} sums to {P[bad[0]].sum():.12g}, not 1")
        self.transitions = P

        r = np.asarray(self.rewards, dtype=np.float64)
        if r.shape != (A,):
            raise InstanceFormatError(f"rewards must have {A} entries, got {r.shape}")
        if not np.all(np.isfinite(r)) or np.any(r < 0) or np.any(r > 1):
            raise InstanceFormatError("rewards must lie in [0, 1]")
        self.rewards = r

        if self.gamma is not None:
            self.gamma = float(self.gamma)
            if not 0.0 < self.gamma < 1.0:
                raise InstanceFormatError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.q is not None:
            q = np.asarray(self.q, dtype=np.float64)
            if q.shape != (S,) or np.any(q < 0) or abs(q.sum() - 1.0) > ROW_TOL:
                raise InstanceFormatError("q must be a distribution over the states")
            self.q = q
        if self.D is not None:
            D = np.asarray(self.D, dtype=np.float64)
            if D.ndim != 2 or D.shape[0] != A or D.shape[1] < 1:
                raise InstanceFormatError(f"D must have {A} rows and at least one column, got {D.shape}")
            if not np.all(np.isfinite(D)) or np.any(D < 0):
                raise InstanceFormatError("D entries must be finite and nonnegative")
            self.D = D
        if self.t_mix is not None:
            self.t_mix = int(self.t_mix)
            if self.t_mix < 1:
                raise InstanceFormatError(f"t_mix must be at least 1, got {self.t_mix}")

    # ── indexing ─────────────────────────────────────────────────────────

    @property
    def n_pairs(self) -> int:
        return self.transitions.shape[0]

    @property
    def K(self) -> int:
        return 0 if self.D is None else self.D.shape[1]

    @property
    def D_max(self) -> float:
        return 0.0 if self.D is None else float(np.max(np.abs(self.D)))

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.actions)[:-1]]).astype(np.int64)

    @cached_property
    def state_of(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_states), self.actions)

    def row(self, i: int, a: int) -> int:
        if not (0 <= i < self.n_states and 0 <= a < self.actions[i]):
            raise DomainError(f"invalid state-action pair ({i}, {a})")
        return int(self.offsets[i]) + a

    def pair(self, row: int) -> Tuple[int, int]:
        i = int(self.state_of[row])
        return i, row - int(self.offsets[i])

    @cached_property
    def I_hat(self) -> np.ndarray:
        """Î: pair × state indicator, Î[(i,a), i] = 1."""
        out = np.zeros((self.n_pairs, self.n_states))
        out[np.arange(self.n_pairs), self.state_of] = 1.0
        return out

    @cached_property
    def alias_tables(self) -> List[AliasTable]:
        return [AliasTable.build(row) for row in self.transitions]

    @property
    def policy_count(self) -> int:
        return int(np.prod([float(a) for a in self.actions]))

    def replace(self, **changes: Any) -> "MdpInstance":
        return replace(self, **changes)

    # ── serialisation ────────────────────────────────────────────────────

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "format": FORMAT,
            "S": self.n_states,
            "actions": list(self.actions),
            "transitions": self.transitions.tolist(),
            "rewards": self.rewards.tolist(),
            "gamma": self.gamma,
            "q": None if self.q is None else self.q.tolist(),
            "D": None if self.D is None else self.D.tolist(),
        }
        if self.t_mix is not None:
            data["t_mix"] = self.t_mix
        if self.D is not None:
            data["feasibility_checked"] = self.feasibility_checked
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MdpInstance":
        if not isinstance(data, dict) or data.get("format") != FORMAT:
            raise InstanceFormatError(f"expected an object with \"format\": \"{FORMAT}\"")
        try:
            return cls(
                n_states=data["S"],
                actions=data["actions"],
                transitions=data["transitions"],
                rewards=data["rewards"],
                gamma=data.get("gamma"),
                q=data.get("q"),
                D=data.get("D"),
                t_mix=data.get("t_mix"),
                feasibility_checked=bool(data.get("feasibility_checked", False)),
            )
        except KeyError as exc:
            raise InstanceFormatError(f"instance is missing field {exc.args[0]!r}")
        except (TypeError, ValueError) as exc:
            raise InstanceFormatError(f"malformed instance: {exc}")

    @classmethod
    def load(cls, path) -> "MdpInstance":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InstanceFormatError(f"cannot read instance {path}: {exc}")
        return cls.from_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


# ─────────────────────────────────────────────────────── policies

class Policy:
    """Per-state action distributions."""

    def __init__(self, rows: Sequence[Sequence[float]]) -> None:
        self.rows: List[np.ndarray] = [np.asarray(r, dtype=np.float64) for r in rows]

    @classmethod
    def deterministic(cls, mdp: MdpInstance, choices: Sequence[int]) -> "Policy":
        rows = []
        for i, a in enumerate(choices):
            row = np.zeros(mdp.actions[i])
            row[a] = 1.0
            rows.append(row)
        return cls(rows)

    @classmethod
    def uniform(cls, mdp: MdpInstance) -> "Policy":
        return cls([np.full(a, 1.0 / a) for a in mdp.actions])

    def validate(self, mdp: MdpInstance) -> None:
        if len(self.rows) != mdp.n_states:
            raise DomainError(f"policy has {len(self.rows)} rows, instance has {mdp.n_states} states")
        for i, row in enumerate(self.rows):
            if row.shape != (mdp.actions[i],):
                raise DomainError(f"policy row {i} has {row.size} entries, state has {mdp.actions[i]} actions")
            if np.any(row < 0) or abs(row.sum() - 1.0) > ROW_TOL:
                raise DomainError(f"policy row {i} is not a distribution")

    def flat(self) -> np.ndarray:
        return np.concatenate(self.rows)

    def matrix(self, mdp: MdpInstance) -> np.ndarray:
        """Π: S × pairs, Π[i, (i,a)] = π_i(a)."""
        self.validate(mdp)
        out = np.zeros((mdp.n_states, mdp.n_pairs))
        out[mdp.state_of, np.arange(mdp.n_pairs)] = self.flat()
        return out

    @property
    def is_deterministic(self) -> bool:
        return all(np.count_nonzero(row) == 1 for row in self.rows)

    def to_list(self) -> List[List[float]]:
        return [row.tolist() for row in self.rows]

    def to_json(self) -> str:
        return json.dumps({"format": POLICY_FORMAT, "policy": self.to_list()}, indent=2) + "\n"

    @classmethod
    def load(cls, path) -> "Policy":
        """Read a policy file or the ``policy`` field of a solve report."""
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InstanceFormatError(f"cannot read policy {path}: {exc}")
        rows = data.get("policy") if isinstance(data, dict) else None
        if not isinstance(rows, list):
            raise InstanceFormatError(f"{path} has no \"policy\" list")
        return cls(rows)

    def __repr__(self) -> str:
        return f"Policy({self.to_list()!r})"


# ─────────────────────────────────────────────────────── generative model

class GenerativeModel:
    """Sampled transitions j ∼ p_ij(a), counted per run."""

    def __init__(self, mdp: MdpInstance, counter: Optional[SampleCounter] = None) -> None:
        self.mdp = mdp
        self.counter = counter if counter is not None else SampleCounter()
        self._tables = mdp.alias_tables

    def sample_row(self, row: int, rng: RngState) -> int:
        self.counter.increment()
        return self._tables[row].sample(rng)

    def sample(self, i: int, a: int, rng: RngState) -> int:
        return self.sample_row(self.mdp.row(i, a), rng)


def generative_sample(
    mdp: MdpInstance, i: int, a: int, rng: RngState, counter: Optional[SampleCounter] = None
) -> int:
    """One draw j ∼ p_i(a); counted on ``counter`` when one is given."""
    row = mdp.row(i, a)
    if counter is not None:
        counter.increment()
    return mdp.alias_tables[row].sample(rng)
