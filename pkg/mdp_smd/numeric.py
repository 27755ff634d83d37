"""
mdp_smd.numeric
~~~~~~~~~~~~~~~
Dense vector / matrix helpers shared by the solvers and the exact oracles.

Vectors and matrices are plain ``numpy.ndarray`` objects of dtype float64.
Everything here is a pure function of its inputs.

Domains
───────
``BoxDomain``            b·[−1, 1]^n, Euclidean geometry (projected steps)
``SimplexDomain``        the probability simplex, entropic geometry
``CappedOrthantDomain``  {s ≥ 0, Σ s ≤ cap}, rescaled-KL geometry
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import DomainError, NonFiniteIterate, SingularMatrix

SIMPLEX_TOL = 1e-9
PIVOT_TOL = 1e-12
WEIGHT_FLOOR = 1e-300


def as_vector(values, *, name: str = "vector") -> np.ndarray:
    """Coerce to a 1-D float64 array and reject NaN / Inf entries."""
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise DomainError(f"{name} has non-finite entries")
    return vec


def as_matrix(values, *, name: str = "matrix") -> np.ndarray:
    mat = np.asarray(values, dtype=np.float64)
    if mat.ndim != 2:
        raise DomainError(f"{name} must be two-dimensional, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise DomainError(f"{name} has non-finite entries")
    return mat


# ─────────────────────────────────────────────────────── domains

@dataclass(frozen=True)
class BoxDomain:
    dim: int
    radius: float

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise DomainError(f"box radius must be nonnegative, got {self.radius}")

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return x.shape == (self.dim,) and bool(np.all(np.abs(x) <= self.radius + tol))

    def center(self) -> np.ndarray:
        return np.zeros(self.dim)

    def divergence_radius(self) -> float:
        """Upper bound on ½‖x − x′‖² over the box: 2·n·b²."""
        return 2.0 * self.dim * self.radius**2


@dataclass(frozen=True)
class SimplexDomain:
    dim: int

    def contains(self, y: np.ndarray, tol: float = SIMPLEX_TOL) -> bool:
        y = np.asarray(y, dtype=np.float64)
        return (
            y.shape == (self.dim,)
            and bool(np.all(y >= 0.0))
            and abs(float(y.sum()) - 1.0) <= tol
        )

    def uniform(self) -> np.ndarray:
        return np.full(self.dim, 1.0 / self.dim)

    def divergence_radius(self) -> float:
        """KL radius from the uniform point: ln m."""
        return math.log(self.dim) if self.dim > 1 else 0.0


@dataclass(frozen=True)
class CappedOrthantDomain:
    dim: int
    cap: float = 2.0

    def contains(self, s: np.ndarray, tol: float = SIMPLEX_TOL) -> bool:
        s = np.asarray(s, dtype=np.float64)
        return (
            s.shape == (self.dim,)
            and bool(np.all(s >= 0.0))
            and float(s.sum()) <= self.cap + tol
        )

    def initial(self) -> np.ndarray:
        return np.full(self.dim, 1.0 / self.dim)

    def divergence_radius(self) -> float:
        """Rescaled-KL radius from (1/K, …, 1/K) over {Σ s ≤ 2}: 2·ln(2K) + 1."""
        return 2.0 * math.log(2.0 * self.dim) + 1.0


# ─────────────────────────────────────────────────────── steps

def project_box(v, b: float) -> np.ndarray:
    """Euclidean projection onto b·[−1, 1]^n (a coordinatewise clamp)."""
    if b < 0:
        raise DomainError(f"box radius must be nonnegative, got {b}")
    return np.clip(as_vector(v, name="v"), -b, b)


def entropic_step(mu, eta_g) -> np.ndarray:
    """KL-prox step on the simplex: out_k ∝ mu_k · exp(−eta_g_k)."""
    mu = as_vector(mu, name="mu")
    eta_g = as_vector(eta_g, name="eta_g")
    if mu.shape != eta_g.shape:
        raise DomainError(f"shape mismatch: mu {mu.shape} vs eta_g {eta_g.shape}")
    if np.any(mu < 0):
        raise DomainError("mu has negative entries")

    support = mu > 0
    if not np.any(support):
        raise DomainError("mu has no positive entry")
    exponent = -eta_g
    # Invariant under a constant shift; subtracting the max keeps exp() in range.
    shift = float(exponent[support].max())
    with np.errstate(under="ignore"):
        weights = np.where(support, mu * np.exp(np.where(support, exponent - shift, 0.0)), 0.0)
    weights = np.where(support, np.maximum(weights, WEIGHT_FLOOR), 0.0)
    total = weights.sum()
    out = weights / total
    if not np.all(np.isfinite(out)):
        raise NonFiniteIterate("entropic step produced non-finite weights")
    return out


def capped_entropic_step(s, eta_g, cap: float) -> np.ndarray:
    """Rescaled-KL prox over {s ≥ 0, Σ s ≤ cap}.

    The unconstrained multiplicative step is kept when it stays under the
    cap; otherwise the cap is active and the step is scaled onto it.
    """
    s = as_vector(s, name="s")
    eta_g = as_vector(eta_g, name="eta_g")
    if s.shape != eta_g.shape:
        raise DomainError(f"shape mismatch: s {s.shape} vs eta_g {eta_g.shape}")
    if np.any(s < 0):
        raise DomainError("s has negative entries")
    with np.errstate(over="ignore", under="ignore"):
        stepped = s * np.exp(-eta_g)
    if not np.all(np.isfinite(stepped)):
        raise NonFiniteIterate("capped entropic step overflowed")
    total = float(stepped.sum())
    if total > cap:
        stepped = stepped * (cap / total)
    return stepped


# ─────────────────────────────────────────────────────── linear algebra

def solve_linear(A, b) -> np.ndarray:
    """Solve A·x = b by LU with partial pivoting.

    ``b`` may be a vector or a matrix of right-hand sides. Raises
    SingularMatrix when a pivot falls under 1e-12 or the residual check
    ‖A·x − b‖∞ ≤ 1e-8·(1 + ‖b‖∞) fails.
    """
    A = as_matrix(A, name="A")
    rhs = np.asarray(b, dtype=np.float64)
    if A.shape[0] != A.shape[1]:
        raise DomainError(f"A must be square, got {A.shape}")
    if rhs.shape[0] != A.shape[0]:
        raise DomainError(f"rhs has {rhs.shape[0]} rows, A has {A.shape[0]}")
    if A.shape[0] == 0:
        return rhs.copy()

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(A, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL:
        raise SingularMatrix(f"pivot below {PIVOT_TOL} in {A.shape[0]}x{A.shape[0]} solve")
    x = linalg.lu_solve((lu, piv), rhs, check_finite=False)

    residual = float(np.max(np.abs(A @ x - rhs)))
    scale = 1.0 + float(np.max(np.abs(rhs))) if rhs.size else 1.0
    if not np.isfinite(residual) or residual > 1e-8 * scale:
        raise SingularMatrix(f"residual {residual:.3e} exceeds tolerance; matrix is ill-conditioned")
    return x


def invert(A) -> np.ndarray:
    A = as_matrix(A, name="A")
    return solve_linear(A, np.eye(A.shape[0]))


def inf_operator_norm(A) -> float:
    """‖A‖∞ = max absolute row sum."""
    A = np.asarray(A, dtype=np.float64)
    if A.size == 0:
        return 0.0
    return float(np.abs(A).sum(axis=1).max())
