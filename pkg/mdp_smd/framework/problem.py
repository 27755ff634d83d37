"""
mdp_smd.framework.problem
~~~~~~~~~~~~~~~~~~~~~~~~~
Saddle-point problem descriptions and their exact duality gaps.

    min_{x ∈ box (, s ∈ capped)}  max_{y ∈ simplex}  f(x, (s,) y)

``BilinearProblem`` is f(x, y) = yᵀMx + bᵀx − cᵀy over b_rad·[−1,1]^n × Δ^m.
Its gap has the closed form

    Gap(x, y) = max_i (Mx − c)_i + bᵀx + b_rad·‖Mᵀy + b‖₁ + cᵀy.

``vertex_gap`` re-derives any problem's gap by enumerating the extreme
points of every block; f is linear in each block, so the extrema sit on
vertices. It is exponential in n and is only meant for cross-checks.
"""

from __future__ import annotations

import abc
import itertools
from typing import Optional

import numpy as np

from ..exceptions import DomainError, OracleTooLarge
from ..numeric import BoxDomain, CappedOrthantDomain, SimplexDomain, as_matrix, as_vector

GAP_FLOOR = -1e-9
MAX_VERTEX_DIM = 16


class SaddleProblem(abc.ABC):
    box: BoxDomain
    simplex: SimplexDomain
    capped: Optional[CappedOrthantDomain] = None

    @abc.abstractmethod
    def value(self, x: np.ndarray, y: np.ndarray, s: Optional[np.ndarray] = None) -> float:
        """f at the given point."""

    @abc.abstractmethod
    def gap(self, x: np.ndarray, y: np.ndarray, s: Optional[np.ndarray] = None) -> float:
        """Exact duality gap in closed form."""

    def check_feasible(self, x, y, s=None, tol: float = 1e-9) -> None:
        if not self.box.contains(x, tol):
            raise DomainError(f"primal iterate outside the box of radius {self.box.radius}")
        if not self.simplex.contains(y, tol):
            raise DomainError("dual iterate is not in the simplex")
        if self.capped is not None:
            if s is None or not self.capped.contains(s, tol):
                raise DomainError(f"slack iterate outside the capped orthant (cap {self.capped.cap})")


class BilinearProblem(SaddleProblem):
    """f(x, y) = yᵀMx + bᵀx − cᵀy with x ∈ radius·[−1,1]^n, y ∈ Δ^m."""

    def __init__(self, M, b, c, radius: float) -> None:
        self.M = as_matrix(M, name="M")
        m, n = self.M.shape
        self.b = as_vector(b, name="b")
        self.c = as_vector(c, name="c")
        if self.b.shape != (n,) or self.c.shape != (m,):
            raise DomainError(f"b must have {n} entries and c {m}, got {self.b.size} and {self.c.size}")
        self.radius = float(radius)
        self.box = BoxDomain(n, self.radius)
        self.simplex = SimplexDomain(m)

    def value(self, x, y, s=None) -> float:
        return float(y @ self.M @ x + self.b @ x - self.c @ y)

    def grad_x(self, y: np.ndarray) -> np.ndarray:
        return self.M.T @ y + self.b

    def grad_y(self, x: np.ndarray) -> np.ndarray:
        """Descent direction for the dual player: −Mx + c."""
        return -(self.M @ x) + self.c

    def gap(self, x, y, s=None) -> float:
        dual_max = float(np.max(self.M @ x - self.c)) + float(self.b @ x)
        primal_min = -self.radius * float(np.abs(self.grad_x(y)).sum()) - float(self.c @ y)
        return dual_max - primal_min


def exact_gap(problem: SaddleProblem, x, y, s=None) -> float:
    x = as_vector(x, name="x")
    y = as_vector(y, name="y")
    s = None if s is None else as_vector(s, name="s")
    problem.check_feasible(x, y, s)
    return problem.gap(x, y, s)


def _box_vertices(box: BoxDomain):
    if box.dim > MAX_VERTEX_DIM:
        raise OracleTooLarge(f"box of dimension {box.dim} has too many vertices to enumerate")
    for signs in itertools.product((-1.0, 1.0), repeat=box.dim):
        yield np.asarray(signs) * box.radius


def _capped_vertices(capped: CappedOrthantDomain):
    yield np.zeros(capped.dim)
    for k in range(capped.dim):
        vertex = np.zeros(capped.dim)
        vertex[k] = capped.cap
        yield vertex


def vertex_gap(problem: SaddleProblem, x, y, s=None) -> float:
    """Duality gap by brute force over the extreme points of every block."""
    x = as_vector(x, name="x")
    y = as_vector(y, name="y")
    problem.check_feasible(x, y, s)
    eye = np.eye(problem.simplex.dim)
    dual_max = max(problem.value(x, eye[i], s) for i in range(problem.simplex.dim))
    slack_vertices = list(_capped_vertices(problem.capped)) if problem.capped is not None else [None]
    primal_min = min(
        problem.value(xv, y, sv)
        for xv in _box_vertices(problem.box)
        for sv in slack_vertices
    )
    return dual_max - primal_min
