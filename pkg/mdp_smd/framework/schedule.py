"""
mdp_smd.framework.schedule
~~~~~~~~~~~~~~~~~~~~~~~~~~
Step sizes and iteration budgets.

For B blocks with second-moment bounds v_b and divergence radii R_b:

    η_b = ε / (s·B·v_b)
    T   = ⌈ max_b  h·B·R_b / (ε·η_b) ⌉

with (s, h) = (2, 4) for the "body" constants and (4, 8) for "appendix".
Two blocks over a box (R = 2nb²) and a simplex (R = ln m) give

    η_x = ε/(4v_x),  η_y = ε/(4v_y),  T = max{16nb²/(εη_x), 8 ln m/(εη_y)}.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from ..conf import get_config
from ..exceptions import ConfigError, DomainError

logger = logging.getLogger("mdp_smd.framework.schedule")


@dataclass(frozen=True)
class ScheduleConstants:
    name: str
    step: float
    horizon: float


BODY = ScheduleConstants("body", 2.0, 4.0)
APPENDIX = ScheduleConstants("appendix", 4.0, 8.0)

_CONSTANTS = {c.name: c for c in (BODY, APPENDIX)}


def constants_for(name: Optional[str] = None) -> ScheduleConstants:
    name = name or get_config()["schedule_constants"]
    try:
        return _CONSTANTS[name]
    except KeyError:
        raise ConfigError(f"unknown schedule constants {name!r}")


def checkpoint_times(T: int, count: int, every: int = 0) -> Tuple[int, ...]:
    """Iteration counts at which the running average is certified.

    ``every > 0`` gives a fixed stride; otherwise ``count`` geometrically
    spaced points. The final iteration is always included.
    """
    if T < 1:
        return ()
    if every > 0:
        points = set(range(every, T + 1, every))
    else:
        points = set(int(p) for p in np.round(np.geomspace(1, T, max(count, 1))))
    points.add(T)
    return tuple(sorted(p for p in points if 1 <= p <= T))


@dataclass(frozen=True)
class SmdSchedule:
    eta_x: float
    eta_y: float
    T: int
    eta_s: Optional[float] = None
    checkpoint_every: int = 0
    checkpoint_count: int = 16
    eps: Optional[float] = None

    def __post_init__(self) -> None:
        if self.T < 1:
            raise DomainError(f"iteration count must be positive, got {self.T}")
        for name in ("eta_x", "eta_y", "eta_s"):
            value = getattr(self, name)
            if value is not None and not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value}")

    def eta(self, block: str) -> float:
        value = {"x": self.eta_x, "y": self.eta_y, "s": self.eta_s}[block]
        if value is None:
            raise ConfigError(f"schedule has no step size for block {block!r}")
        return value

    @property
    def checkpoints(self) -> Tuple[int, ...]:
        return checkpoint_times(self.T, self.checkpoint_count, self.checkpoint_every)

    def with_iterations(self, T: int) -> "SmdSchedule":
        return replace(self, T=int(T))

    def with_steps(self, **etas: float) -> "SmdSchedule":
        return replace(self, **{f"eta_{k}": float(v) for k, v in etas.items() if v is not None})


def check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")


def _ceil(value: float) -> int:
    # Absorb rounding noise so an exact integer budget is not bumped by one.
    return max(1, math.ceil(value * (1.0 - 1e-12)))


def block_schedule(
    eps: float,
    blocks: Mapping[str, Tuple[float, float]],
    *,
    constants: Optional[ScheduleConstants] = None,
    checkpoints: Optional[int] = None,
) -> SmdSchedule:
    """Schedule for blocks given as ``{name: (divergence_radius, v)}``."""
    check_eps(eps)
    constants = constants or constants_for()
    B = len(blocks)
    etas: Dict[str, float] = {}
    horizon = 1.0
    for name, (radius, v) in blocks.items():
        if not v > 0 or radius < 0:
            raise DomainError(f"block {name!r}: bounds must be positive, got R={radius}, v={v}")
        eta = eps / (constants.step * B * v)
        etas[name] = eta
        horizon = max(horizon, constants.horizon * B * radius / (eps * eta))
    schedule = SmdSchedule(
        eta_x=etas["x"],
        eta_y=etas["y"],
        eta_s=etas.get("s"),
        T=_ceil(horizon),
        checkpoint_count=checkpoints or get_config()["checkpoints"],
        eps=eps,
    )
    logger.info(
        "schedule (%s constants, eps=%g): %s T=%d",
        constants.name, eps,
        " ".join(f"eta_{k}={v:.3e}" for k, v in etas.items()),
        schedule.T,
    )
    return schedule


def schedule_for(
    eps: float,
    n: int,
    b: float,
    m: int,
    vx: float,
    vy: float,
    *,
    constants: Optional[ScheduleConstants] = None,
    checkpoints: Optional[int] = None,
) -> SmdSchedule:
    """Two-block (box × simplex) schedule."""
    if n < 1 or m < 1:
        raise DomainError(f"dimensions must be positive, got n={n}, m={m}")
    return block_schedule(
        eps,
        {"x": (2.0 * n * b * b, vx), "y": (math.log(m) if m > 1 else 0.0, vy)},
        constants=constants,
        checkpoints=checkpoints,
    )
