"""
mdp_smd.framework.estimators
~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Bounded gradient estimators and the iterate view they sample from.

A bounded estimator is unbiased for the block gradient and declares

    c    a bound on the max entry of every draw
    v    a bound on the second moment in its norm (Euclidean for the box,
         the local norm Σ_k y′_k g_k² for simplex / capped blocks)

Draws are ``SparseGradient`` objects: a handful of (index, value) pairs
plus an optional constant added to every coordinate.
"""

from __future__ import annotations

import abc
import enum
import math
import threading
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Tuple

import numpy as np

from ..exceptions import DomainError
from ..sampling import RngState, make_weighted_sampler


class NormKind(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    LOCAL_SIMPLEX = "local_simplex"
    LOCAL_CAPPED = "local_capped"


@dataclass(frozen=True)
class EstimatorBounds:
    c: float
    v: float
    norm_kind: NormKind

    def __post_init__(self) -> None:
        if not self.v > 0:
            raise DomainError(f"second-moment bound must be positive, got {self.v}")
        if self.norm_kind is not NormKind.EUCLIDEAN and not self.c > 0:
            raise DomainError(f"max-entry bound must be positive, got {self.c}")


class SparseGradient:
    """A stochastic gradient with few nonzeros and an optional dense shift."""

    __slots__ = ("entries", "shift")

    def __init__(self, entries: Optional[Dict[int, float]] = None, shift: float = 0.0) -> None:
        self.entries: Dict[int, float] = dict(entries) if entries else {}
        self.shift = float(shift)

    def add(self, index: int, value: float) -> "SparseGradient":
        self.entries[index] = self.entries.get(index, 0.0) + value
        return self

    def items(self) -> Iterator[Tuple[int, float]]:
        return iter(self.entries.items())

    def negate(self) -> "SparseGradient":
        return SparseGradient({k: -val for k, val in self.entries.items()}, -self.shift)

    def dense(self, dim: int) -> np.ndarray:
        out = np.full(dim, self.shift)
        for k, val in self.entries.items():
            if not 0 <= k < dim:
                raise DomainError(f"gradient index {k} out of range for dimension {dim}")
            out[k] += val
        return out

    def max_abs(self) -> float:
        """Max |entry|, counting the shift on untouched coordinates."""
        worst = abs(self.shift)
        for val in self.entries.values():
            worst = max(worst, abs(val + self.shift))
        return worst

    def is_finite(self) -> bool:
        return math.isfinite(self.shift) and all(math.isfinite(v) for v in self.entries.values())

    def __repr__(self) -> str:
        return f"SparseGradient({self.entries!r}, shift={self.shift!r})"


class SampleCounter:
    """Counts generative-model (or matrix-entry) draws for one run."""

    def __init__(self) -> None:
        self.count = 0
        self._lock = threading.Lock()

    def increment(self, n: int = 1) -> None:
        # Runs are single-threaded; the lock only guards the shared default.
        with self._lock:
            self.count += n

    def reset(self) -> None:
        with self._lock:
            self.count = 0


# ─────────────────────────────────────────────────────── iterate view

class SmdState:
    """The current iterate as estimators see it.

    ``x`` is the box block, ``s`` the optional capped block and the dual
    block is held as unnormalised weights inside ``y_sampler``.
    """

    def __init__(self, x: np.ndarray, y_sampler, s: Optional[np.ndarray] = None) -> None:
        self.x = x
        self.y_sampler = y_sampler
        self.s = s

    @classmethod
    def frozen(cls, x, y, s=None, sampler: Optional[str] = None) -> "SmdState":
        """Build a state from dense arrays (tests, verification, oracles)."""
        x = np.array(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if y.ndim != 1 or np.any(y < 0) or y.sum() <= 0:
            raise DomainError("dual iterate must be a nonnegative vector with positive mass")
        s_arr = None if s is None else np.array(s, dtype=np.float64)
        return cls(x, make_weighted_sampler(y, kind=sampler), s_arr)

    def y(self) -> np.ndarray:
        w = self.y_sampler.weights()
        return w / w.sum()

    def sample_dual(self, rng: RngState) -> int:
        return self.y_sampler.sample(rng)


class BoundedEstimator(abc.ABC):
    """Base class for block gradient estimators.

    Subclasses set ``block`` ("x", "y" or "s") and ``bounds``. Estimators
    of a maximised objective set ``ascent = True``; the loop negates their
    draws before the descent step.
    """

    block: str = "x"
    ascent: bool = False

    def __init__(self, bounds: EstimatorBounds, counter: Optional[SampleCounter] = None) -> None:
        self.bounds = bounds
        self.counter = counter if counter is not None else SampleCounter()

    @abc.abstractmethod
    def draw(self, state: SmdState, rng: RngState) -> SparseGradient:
        """One stochastic gradient at ``state``."""

    @abc.abstractmethod
    def exact(self, state: SmdState) -> np.ndarray:
        """The expectation of ``draw`` at ``state``."""

    def __repr__(self) -> str:
        return f"{type(self).__name__}(c={self.bounds.c:g}, v={self.bounds.v:g}, {self.bounds.norm_kind.value})"
