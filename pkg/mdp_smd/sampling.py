"""
mdp_smd.sampling
~~~~~~~~~~~~~~~~
Seeded randomness and weighted discrete sampling.

``RngState``
    A counter-based Philox stream keyed by (seed, stream). One stream per
    estimator role, so checkpoints and extra estimators never shift the
    draws of another role.

``AliasTable``
    Vose's alias method: O(n) build, O(1) draws from a static distribution
    (transition rows, |M| rows).

``SumTree``
    Complete binary tree over mutable weights: O(log n) single-weight
    updates and proportional draws. Used for the dual simplex, which
    changes one coordinate per iteration.

``LinearScanSampler``
    Same interface as SumTree with O(n) draws; kept as the correctness
    oracle and selectable through ``MDP_SMD["SAMPLER"] = "linear"``.
"""

from __future__ import annotations

import enum
import logging
from typing import Iterable, List, Optional

import numpy as np

from .exceptions import DomainError, EmptyDistribution

logger = logging.getLogger("mdp_smd.sampling")

_BUFFER = 4096


class Stream(enum.IntEnum):
    """Stream identifiers, one per estimator role."""

    V = 0
    MU = 1
    S = 2
    GENERATOR = 3
    EVALUATION = 4


class RngState:
    """Deterministic uniform source for one (seed, stream) pair."""

    def __init__(self, seed: int, stream: int = 0) -> None:
        if seed < 0:
            raise DomainError(f"seed must be nonnegative, got {seed}")
        self.seed = int(seed)
        self.stream = int(stream)
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        self.generator = np.random.Generator(np.random.Philox(sequence))
        self._buffer = self.generator.random(_BUFFER)
        self._pos = 0

    def spawn(self, stream: int) -> "RngState":
        return RngState(self.seed, int(stream))

    def uniform(self) -> float:
        """Next uniform draw in [0, 1)."""
        if self._pos == _BUFFER:
            self._buffer = self.generator.random(_BUFFER)
            self._pos = 0
        u = self._buffer[self._pos]
        self._pos += 1
        return float(u)

    def index(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        k = int(self.uniform() * n)
        return k if k < n else n - 1

    def __repr__(self) -> str:
        return f"RngState(seed={self.seed}, stream={self.stream})"


# ─────────────────────────────────────────────────────── alias tables

def _validate_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise DomainError("weights must be a non-empty vector")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise DomainError("weights must be finite and nonnegative")
    if w.sum() <= 0:
        raise DomainError("weights sum to zero")
    return w


class AliasTable:
    """Vose alias table over a fixed weight vector."""

    __slots__ = ("n", "prob", "alias")

    def __init__(self, n: int, prob: List[float], alias: List[int]) -> None:
        self.n = n
        self.prob = prob
        self.alias = alias

    @classmethod
    def build(cls, weights) -> "AliasTable":
        w = _validate_weights(weights)
        n = w.size
        scaled = list(w * (n / w.sum()))

        small = [idx for idx, x in enumerate(scaled) if x < 1.0]
        large = [idx for idx, x in enumerate(scaled) if x >= 1.0]

        prob = [0.0] * n
        alias = list(range(n))
        while small and large:
            lo = small.pop()
            hi = large.pop()
            prob[lo] = scaled[lo]
            alias[lo] = hi
            scaled[hi] -= 1.0 - scaled[lo]
            if scaled[hi] < 1.0:
                small.append(hi)
            else:
                large.append(hi)
        # Leftovers are 1 up to rounding.
        for idx in large + small:
            prob[idx] = 1.0 if w[idx] > 0 else 0.0
        return cls(n, prob, alias)

    def sample(self, rng: RngState) -> int:
        slot = rng.index(self.n)
        if rng.uniform() < self.prob[slot]:
            return slot
        return self.alias[slot]

    def reconstruct(self) -> np.ndarray:
        """Distribution induced by the table, for exactness checks."""
        dist = np.zeros(self.n)
        for slot in range(self.n):
            dist[slot] += self.prob[slot] / self.n
            dist[self.alias[slot]] += (1.0 - self.prob[slot]) / self.n
        return dist


def alias_build(weights) -> AliasTable:
    return AliasTable.build(weights)


# ─────────────────────────────────────────────────────── mutable samplers

class SumTree:
    """Sum tree stored as a 1-indexed heap; leaves start at ``capacity``."""

    def __init__(self, weights: Iterable[float], rebuild_every: Optional[int] = None) -> None:
        w = np.asarray(list(weights), dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise DomainError("SumTree needs at least one weight")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise DomainError("weights must be finite and nonnegative")
        self.n = int(w.size)
        capacity = 1
        while capacity < self.n:
            capacity *= 2
        self.capacity = capacity
        self._nodes = [0.0] * (2 * capacity)
        self._nodes[capacity:capacity + self.n] = [float(x) for x in w]
        if rebuild_every is None:
            from .conf import get_config
            rebuild_every = get_config()["sumtree_rebuild_every"]
        self.rebuild_every = int(rebuild_every)
        self._updates = 0
        self.rebuild()

    def __len__(self) -> int:
        return self.n

    @property
    def total(self) -> float:
        return self._nodes[1]

    def weight(self, index: int) -> float:
        return self._nodes[self.capacity + index]

    def weights(self) -> np.ndarray:
        return np.array(self._nodes[self.capacity:self.capacity + self.n])

    def rebuild(self) -> None:
        """Recompute every internal node from the leaves."""
        nodes = self._nodes
        for idx in range(self.capacity - 1, 0, -1):
            nodes[idx] = nodes[2 * idx] + nodes[2 * idx + 1]
        self._updates = 0

    def update(self, index: int, new_weight: float) -> None:
        if not 0 <= index < self.n:
            raise DomainError(f"index {index} out of range for {self.n} weights")
        if not (new_weight >= 0.0) or new_weight == float("inf"):
            raise DomainError(f"weight must be finite and nonnegative, got {new_weight}")
        nodes = self._nodes
        idx = self.capacity + index
        nodes[idx] = new_weight
        idx //= 2
        while idx:
            nodes[idx] = nodes[2 * idx] + nodes[2 * idx + 1]
            idx //= 2
        self._updates += 1
        if self._updates >= self.rebuild_every:
            self.rebuild()

    def scale(self, factor: float) -> None:
        """Multiply every weight by ``factor`` (used to renormalize)."""
        nodes = self._nodes
        for idx in range(self.capacity, self.capacity + self.n):
            nodes[idx] *= factor
        self.rebuild()

    def find(self, target: float) -> int:
        """Leaf whose cumulative interval contains ``target``.

        Zero-weight subtrees are never entered, so rounding at an interval
        edge cannot return an index with zero weight.
        """
        nodes = self._nodes
        idx = 1
        while idx < self.capacity:
            left = 2 * idx
            if (target < nodes[left] and nodes[left] > 0.0) or nodes[left + 1] <= 0.0:
                idx = left
            else:
                target -= nodes[left]
                idx = left + 1
        return idx - self.capacity

    def sample(self, rng: RngState) -> int:
        total = self.total
        if not total > 0.0:
            raise EmptyDistribution("sum tree has zero total weight")
        return self.find(rng.uniform() * total)

    def max_drift(self) -> float:
        """Largest |node − (left + right)| relative to (1 + node)."""
        nodes = self._nodes
        worst = 0.0
        for idx in range(1, self.capacity):
            expected = nodes[2 * idx] + nodes[2 * idx + 1]
            worst = max(worst, abs(nodes[idx] - expected) / (1.0 + abs(expected)))
        return worst


class LinearScanSampler:
    """O(n) reference sampler with the SumTree interface."""

    def __init__(self, weights: Iterable[float], rebuild_every: Optional[int] = None) -> None:
        w = np.asarray(list(weights), dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise DomainError("sampler needs at least one weight")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise DomainError("weights must be finite and nonnegative")
        self.n = int(w.size)
        self._weights = [float(x) for x in w]

    def __len__(self) -> int:
        return self.n

    @property
    def total(self) -> float:
        return sum(self._weights)

    def weight(self, index: int) -> float:
        return self._weights[index]

    def weights(self) -> np.ndarray:
        return np.array(self._weights)

    def update(self, index: int, new_weight: float) -> None:
        if not 0 <= index < self.n:
            raise DomainError(f"index {index} out of range for {self.n} weights")
        if not (new_weight >= 0.0) or new_weight == float("inf"):
            raise DomainError(f"weight must be finite and nonnegative, got {new_weight}")
        self._weights[index] = new_weight

    def scale(self, factor: float) -> None:
        self._weights = [x * factor for x in self._weights]

    def find(self, target: float) -> int:
        last = 0
        for idx, w in enumerate(self._weights):
            if w <= 0.0:
                continue
            last = idx
            if target < w:
                return idx
            target -= w
        return last

    def sample(self, rng: RngState) -> int:
        total = self.total
        if not total > 0.0:
            raise EmptyDistribution("sampler has zero total weight")
        return self.find(rng.uniform() * total)


def make_weighted_sampler(weights, kind: Optional[str] = None):
    """Build the configured mutable sampler ("sumtree" or "linear")."""
    if kind is None:
        from .conf import get_config
        kind = get_config()["sampler"]
    if kind == "sumtree":
        return SumTree(weights)
    if kind == "linear":
        return LinearScanSampler(weights)
    raise DomainError(f"unknown sampler kind {kind!r}")


def sumtree_update(tree: SumTree, index: int, new_weight: float) -> None:
    tree.update(index, new_weight)


def sumtree_sample(tree: SumTree, rng: RngState) -> int:
    return tree.sample(rng)
