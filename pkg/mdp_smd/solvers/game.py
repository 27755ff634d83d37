"""
mdp_smd.solvers.game
~~~~~~~~~~~~~~~~~~~~
Box-simplex matrix games and ℓ∞ regression.

    min_{x ∈ b_rad·[−1,1]^n}  max_{y ∈ Δ^m}  yᵀMx + bᵀx − cᵀy

Gradients are estimated from single matrix entries. The x-side draws a
row i ∼ y and a column j ∼ |M_ij|/‖M_i‖₁; the y-side draws a cell
(i, j) ∼ |M_ij|/Σ|M|. Vectors b and c contribute one extra draw from
|b|/‖b‖₁ and |c|/‖c‖₁ when they are nonzero. Each estimator draw counts
as one sample.

ℓ∞ regression  min_{‖x‖∞ ≤ 1} ‖Mx − c‖∞  is the game with M̂ = [M; −M],
ĉ = [c; −c] and b = 0.

Game file::

    {"m": 2, "n": 2, "entries": [1, -1, -1, 1], "b": [0, 0], "c": [0, 0],
     "radius": 1}
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from ..exceptions import DomainError, InstanceFormatError
from ..framework import (
    BilinearProblem,
    BoundedEstimator,
    EstimatorBounds,
    NormKind,
    SampleCounter,
    SmdState,
    SolveReport,
    SparseGradient,
    constants_for,
    run_smd,
    schedule_for,
)
from ..numeric import as_matrix, as_vector, inf_operator_norm
from ..sampling import AliasTable, RngState

logger = logging.getLogger("mdp_smd.solvers.game")

# Bounds are upper bounds, so lifting a zero bound keeps them valid.
BOUND_FLOOR = 1e-12


def _alias_or_none(weights: np.ndarray) -> Optional[AliasTable]:
    return AliasTable.build(weights) if weights.sum() > 0.0 else None


@dataclass(eq=False)
class GameInstance:
    M: np.ndarray
    b: np.ndarray
    c: np.ndarray
    radius: float = 1.0

    def __post_init__(self) -> None:
        self.M = as_matrix(self.M, name="M")
        m, n = self.M.shape
        if m < 1 or n < 1:
            raise DomainError(f"M must have at least one row and column, got {self.M.shape}")
        self.b = as_vector(self.b, name="b")
        self.c = as_vector(self.c, name="c")
        if self.b.shape != (n,) or self.c.shape != (m,):
            raise DomainError(f"b must have {n} entries and c {m}, got {self.b.size} and {self.c.size}")
        self.radius = float(self.radius)
        if not self.radius > 0.0:
            raise DomainError(f"box radius must be positive, got {self.radius}")

    @property
    def m(self) -> int:
        return self.M.shape[0]

    @property
    def n(self) -> int:
        return self.M.shape[1]

    @cached_property
    def row_l1(self) -> np.ndarray:
        return np.abs(self.M).sum(axis=1)

    @property
    def norm_inf(self) -> float:
        """‖M‖∞ = max_i ‖M(i,:)‖₁."""
        return inf_operator_norm(self.M)

    @property
    def total_mass(self) -> float:
        return float(np.abs(self.M).sum())

    @cached_property
    def row_tables(self) -> List[Optional[AliasTable]]:
        return [_alias_or_none(np.abs(row)) for row in self.M]

    @cached_property
    def cell_table(self) -> Optional[AliasTable]:
        return _alias_or_none(np.abs(self.M).ravel())

    @cached_property
    def b_table(self) -> Optional[AliasTable]:
        return _alias_or_none(np.abs(self.b))

    @cached_property
    def c_table(self) -> Optional[AliasTable]:
        return _alias_or_none(np.abs(self.c))

    def problem(self) -> BilinearProblem:
        return BilinearProblem(self.M, self.b, self.c, self.radius)

    def stacked(self) -> "GameInstance":
        """[M; −M], [c; −c] with b = 0 and unit radius."""
        return GameInstance(np.vstack([self.M, -self.M]), np.zeros(self.n), np.concatenate([self.c, -self.c]), 1.0)

    # ── serialisation ────────────────────────────────────────────────────

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "n": self.n,
            "entries": self.M.ravel().tolist(),
            "b": self.b.tolist(),
            "c": self.c.tolist(),
            "radius": self.radius,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GameInstance":
        try:
            m, n = int(data["m"]), int(data["n"])
            entries = np.asarray(data["entries"], dtype=np.float64)
            if entries.size != m * n:
                raise InstanceFormatError(f"entries has {entries.size} values, expected m·n = {m * n}")
            return cls(
                entries.reshape(m, n),
                data.get("b") if data.get("b") is not None else np.zeros(n),
                data.get("c") if data.get("c") is not None else np.zeros(m),
                data.get("radius", 1.0),
            )
        except KeyError as exc:
            raise InstanceFormatError(f"game is missing field {exc.args[0]!r}")
        except (TypeError, ValueError) as exc:
            raise InstanceFormatError(f"malformed game: {exc}")

    @classmethod
    def load(cls, path) -> "GameInstance":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InstanceFormatError(f"cannot read game {path}: {exc}")
        if not isinstance(data, dict):
            raise InstanceFormatError(f"{path} does not hold a JSON object")
        return cls.from_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


# ─────────────────────────────────────────────────────── estimators

def x_bounds(game: GameInstance, global_weights: bool = False) -> EstimatorBounds:
    b1 = float(np.abs(game.b).sum())
    spread = game.total_mass * game.norm_inf if global_weights else game.norm_inf**2
    c = (game.total_mass if global_weights else game.norm_inf) + b1
    return EstimatorBounds(c, max(2.0 * (b1**2 + spread), BOUND_FLOOR), NormKind.EUCLIDEAN)


def y_bounds(game: GameInstance) -> EstimatorBounds:
    c_inf = float(np.max(np.abs(game.c)))
    m_inf = game.norm_inf
    return EstimatorBounds(
        max(game.m * (game.radius * m_inf + c_inf), BOUND_FLOOR),
        max(2.0 * game.m * (c_inf**2 + game.radius**2 * m_inf**2), BOUND_FLOOR),
        NormKind.LOCAL_SIMPLEX,
    )


class GameX(BoundedEstimator):
    """Unbiased for Mᵀy + b.

    Default: i ∼ y, j ∼ |M_ij|/‖M_i‖₁, so the entry is sign(M_ij)·‖M_i‖₁.
    With ``global_weights`` the cell is drawn from |M|/Σ|M| and weighted
    by y_i; its second moment is bounded by 2(‖b‖₁² + Σ|M|·‖M‖∞).
    """

    block = "x"

    def __init__(self, game: GameInstance, counter: Optional[SampleCounter] = None, global_weights: bool = False) -> None:
        super().__init__(x_bounds(game, global_weights), counter)
        self.game = game
        self.global_weights = global_weights

    def draw(self, state: SmdState, rng: RngState) -> SparseGradient:
        game = self.game
        self.counter.increment()
        g = SparseGradient()
        if self.global_weights:
            if game.cell_table is not None:
                i, j = divmod(game.cell_table.sample(rng), game.n)
                y_i = state.y_sampler.weight(i) / state.y_sampler.total
                g.add(j, np.sign(game.M[i, j]) * game.total_mass * y_i)
        else:
            i = state.sample_dual(rng)
            table = game.row_tables[i]
            if table is not None:
                j = table.sample(rng)
                g.add(j, np.sign(game.M[i, j]) * game.row_l1[i])
        if game.b_table is not None:
            k = game.b_table.sample(rng)
            g.add(k, np.sign(game.b[k]) * float(np.abs(game.b).sum()))
        return g

    def exact(self, state: SmdState) -> np.ndarray:
        return self.game.M.T @ state.y() + self.game.b


class GameY(BoundedEstimator):
    """Unbiased for −Mx + c: −sign(M_ij)·Σ|M|·x_j at i, plus sign(c_i′)·‖c‖₁."""

    block = "y"

    def __init__(self, game: GameInstance, counter: Optional[SampleCounter] = None) -> None:
        super().__init__(y_bounds(game), counter)
        self.game = game

    def draw(self, state: SmdState, rng: RngState) -> SparseGradient:
        game = self.game
        self.counter.increment()
        g = SparseGradient()
        if game.cell_table is not None:
            i, j = divmod(game.cell_table.sample(rng), game.n)
            g.add(i, -np.sign(game.M[i, j]) * game.total_mass * state.x[j])
        if game.c_table is not None:
            k = game.c_table.sample(rng)
            g.add(k, np.sign(game.c[k]) * float(np.abs(game.c).sum()))
        return g

    def exact(self, state: SmdState) -> np.ndarray:
        return -(self.game.M @ state.x) + self.game.c


def estimator_x_game(game: GameInstance, counter: Optional[SampleCounter] = None, global_weights: bool = False) -> GameX:
    return GameX(game, counter, global_weights)


def estimator_y_game(game: GameInstance, counter: Optional[SampleCounter] = None) -> GameY:
    return GameY(game, counter)


# ─────────────────────────────────────────────────────── solve

def solve_game(
    game: GameInstance,
    eps: float,
    seed: int,
    *,
    iterations: Optional[int] = None,
    accumulator: Optional[str] = None,
    sampler: Optional[str] = None,
    constants: Optional[str] = None,
    checkpoints: Optional[int] = None,
    global_weights: bool = False,
    observer: Optional[Callable] = None,
    label: str = "game",
) -> SolveReport:
    """Expected ε-approximate saddle point of the game."""
    scale = game.norm_inf + float(np.max(np.abs(game.c)))
    if scale < 1.0:
        logger.warning(
            "‖M‖∞ + ‖c‖∞ = %.4g is below 1; the entry bound may trip the step guard", scale
        )
    counter = SampleCounter()
    est_x = estimator_x_game(game, counter, global_weights)
    est_y = estimator_y_game(game, counter)
    schedule = schedule_for(
        eps,
        game.n,
        game.radius,
        game.m,
        est_x.bounds.v,
        est_y.bounds.v,
        constants=constants_for(constants),
        checkpoints=checkpoints,
    )
    if iterations is not None:
        logger.info("iteration override: T=%d (schedule asked for %d)", iterations, schedule.T)
        schedule = schedule.with_iterations(iterations)
    report = run_smd(
        game.problem(),
        {"x": est_x, "y": est_y},
        schedule,
        RngState(int(seed)),
        accumulator,
        sampler=sampler,
        counter=counter,
        observer=observer,
        label=label,
    )
    report.extra.update({"m": game.m, "n": game.n, "radius": game.radius})
    return report


def regression_certificate(M, c, x, ys) -> float:
    """‖Mx − c‖∞ minus the best dual bound −‖M̂ᵀy‖₁ − ĉᵀy over ``ys``."""
    M = as_matrix(M, name="M")
    c = as_vector(c, name="c")
    M_hat = np.vstack([M, -M])
    c_hat = np.concatenate([c, -c])
    primal = float(np.max(np.abs(M @ x - c)))
    dual = max(-float(np.abs(M_hat.T @ y).sum()) - float(c_hat @ y) for y in ys)
    return primal - dual


def linf_regression(M, c, eps: float, seed: int, **options: Any) -> Tuple[SolveReport, np.ndarray, float]:
    """Solve min_{‖x‖∞ ≤ 1} ‖Mx − c‖∞ and certify the result."""
    M = as_matrix(M, name="M")
    c = as_vector(c, name="c")
    game = GameInstance(M, np.zeros(M.shape[1]), c).stacked()
    ys: List[np.ndarray] = []

    def record(t, x_avg, y_avg, s_avg):
        ys.append(y_avg.copy())
        return None

    report = solve_game(game, eps, seed, observer=record, label="regression", **options)
    ys.append(report.y)
    certified = regression_certificate(M, c, report.x, ys)
    report.extra.update({"objective": float(np.max(np.abs(M @ report.x - c))), "certified_gap": certified})
    return report, report.x, certified


def solve_linf_regression(M, c, eps: float, seed: int, **options: Any) -> Tuple[np.ndarray, float]:
    _, x, certified = linf_regression(M, c, eps, seed, **options)
    return x, certified
