"""
mdp_smd.framework.loop
~~~~~~~~~~~~~~~~~~~~~~
The stochastic mirror descent loop over box (× capped orthant) × simplex.

Each iteration:

  1. the current iterate is added to the running averages;
  2. every block estimator is drawn at that same iterate;
  3. the box takes a projected step, the capped block a rescaled-KL step
     and the dual a multiplicative step on the coordinates it touched.

The dual block lives in a weighted sampler as unnormalised weights, so a
single-coordinate update is O(log m) and dual draws need no normalisation.

Initial point: x₀ = 0, y₀ uniform, s₀ = (1/K, …, 1/K).
"""

from __future__ import annotations

import logging
import math
import time
from typing import Callable, Dict, List, Mapping, Optional, Union

import numpy as np

from ..conf import get_config
from ..exceptions import ConfigError, NonFiniteIterate, StepBoundViolation
from ..numeric import WEIGHT_FLOOR, capped_entropic_step
from ..sampling import RngState, Stream, make_weighted_sampler
from .accumulator import IterateAccumulator
from .estimators import BoundedEstimator, NormKind, SampleCounter, SmdState, SparseGradient
from .problem import SaddleProblem
from .report import Checkpoint, SolveReport
from .schedule import SmdSchedule

logger = logging.getLogger("mdp_smd.framework.loop")

# Renormalise the dual weights once their total leaves [2⁻²⁰, 2²⁰].
RESCALE_LOW = 2.0**-20
RESCALE_HIGH = 2.0**20
STEP_LIMIT = 0.5

_STREAMS = {"x": Stream.V, "y": Stream.MU, "s": Stream.S}

# observer(t, x_avg, y_avg, s_avg) → suboptimality or None
Observer = Callable[[int, np.ndarray, np.ndarray, Optional[np.ndarray]], Optional[float]]


def _check_bounds(estimators: Mapping[str, BoundedEstimator], schedule: SmdSchedule) -> None:
    """Advisory: simplex-side blocks should satisfy c ≤ 2v/ε."""
    if schedule.eps is None:
        return
    for name, est in estimators.items():
        b = est.bounds
        if b.norm_kind is not NormKind.EUCLIDEAN and b.c > 2.0 * b.v / schedule.eps:
            logger.warning(
                "estimator %r for block %r has c=%g > 2v/eps=%g; relying on the runtime step guard",
                est, name, b.c, 2.0 * b.v / schedule.eps,
            )


def _step_guard(block: str, eta: float, g: SparseGradient, t: int) -> None:
    largest = eta * g.max_abs()
    if largest > STEP_LIMIT + 1e-12:
        raise StepBoundViolation(
            f"iteration {t}: block {block!r} step ‖η·g̃‖∞ = {largest:.4g} exceeds {STEP_LIMIT}"
        )


def run_smd(
    problem: SaddleProblem,
    estimators: Mapping[str, BoundedEstimator],
    schedule: SmdSchedule,
    rng: Union[RngState, int],
    mode: Optional[str] = None,
    *,
    sampler: Optional[str] = None,
    counter: Optional[SampleCounter] = None,
    observer: Optional[Observer] = None,
    trace: bool = False,
    label: str = "smd",
) -> SolveReport:
    """Run T iterations and return the averaged iterates with a checkpoint trail."""
    mode = mode or get_config()["accumulator"]
    root = rng if isinstance(rng, RngState) else RngState(int(rng))

    blocks = ["x", "y"] + (["s"] if problem.capped is not None else [])
    if sorted(estimators) != sorted(blocks):
        raise ConfigError(f"estimators must cover blocks {blocks}, got {sorted(estimators)}")
    for name, est in estimators.items():
        if est.block != name:
            raise ConfigError(f"estimator {est!r} is for block {est.block!r}, registered as {name!r}")
    _check_bounds(estimators, schedule)

    if counter is None:
        counter = estimators["x"].counter
    streams = {name: root.spawn(_STREAMS[name]) for name in blocks}
    eta = {name: schedule.eta(name) for name in blocks}

    box = problem.box
    radius = box.radius
    m = problem.simplex.dim
    x = box.center()
    y_sampler = make_weighted_sampler(np.full(m, 1.0 / m), kind=sampler)
    s = problem.capped.initial() if problem.capped is not None else None
    cap = problem.capped.cap if problem.capped is not None else 0.0
    state = SmdState(x, y_sampler, s)

    acc = IterateAccumulator(mode, box.dim, m, None if s is None else s.size)
    checkpoints = set(schedule.checkpoints)
    trail: List[Checkpoint] = []
    records: Optional[List[Dict[str, np.ndarray]]] = [] if trace else None
    est_x, est_y = estimators["x"], estimators["y"]
    est_s = estimators.get("s")

    start_samples = counter.count
    started = time.perf_counter()

    for t in range(1, schedule.T + 1):
        acc.record(x, y_sampler, s)

        gx = est_x.draw(state, streams["x"])
        gy = est_y.draw(state, streams["y"])
        gs = est_s.draw(state, streams["s"]) if est_s is not None else None
        if est_x.ascent:
            gx = gx.negate()
        if est_y.ascent:
            gy = gy.negate()
        if gs is not None and est_s.ascent:
            gs = gs.negate()

        for name, g in (("x", gx), ("y", gy), ("s", gs)):
            if g is not None and not g.is_finite():
                raise NonFiniteIterate(f"iteration {t}: non-finite gradient for block {name!r}")
        _step_guard("y", eta["y"], gy, t)
        if gs is not None:
            _step_guard("s", eta["s"], gs, t)

        if records is not None:
            records.append({"x": x.copy(), "gx": gx.dense(box.dim)})

        # ── box: projected step ──────────────────────────────────────────
        if gx.shift:
            acc.before_box_rewrite(x)
            x[:] = np.clip(x - eta["x"] * gx.dense(box.dim), -radius, radius)
        else:
            for k, g in gx.items():
                old = x[k]
                new = min(radius, max(-radius, old - eta["x"] * g))
                if new != old:
                    acc.before_box_change(k, old)
                    x[k] = new

        # ── capped orthant: rescaled-KL step ─────────────────────────────
        if gs is not None:
            s[:] = capped_entropic_step(s, eta["s"] * gs.dense(s.size), cap)

        # ── dual: multiplicative step on touched weights ─────────────────
        # A constant shift cancels under normalisation.
        for k, g in gy.items():
            old = y_sampler.weight(k)
            if old <= 0.0:
                continue
            new = max(old * math.exp(-eta["y"] * g), WEIGHT_FLOOR)
            acc.before_dual_change(k, old)
            y_sampler.update(k, new)
        total = y_sampler.total
        if not (RESCALE_LOW <= total <= RESCALE_HIGH):
            if not math.isfinite(total) or total <= 0.0:
                raise NonFiniteIterate(f"iteration {t}: dual weight total is {total}")
            acc.before_dual_rescale(y_sampler.weights())
            y_sampler.scale(1.0 / total)
            logger.debug("iteration %d: rescaled dual weights (total was %.3e)", t, total)

        if t in checkpoints:
            x_avg, y_avg, s_avg = acc.snapshot(x, y_sampler, s)
            gap = problem.gap(x_avg, y_avg, s_avg)
            subopt = observer(t, x_avg, y_avg, s_avg) if observer is not None else None
            trail.append(Checkpoint(t, counter.count - start_samples, gap, subopt))
            logger.debug("%s t=%d samples=%d gap=%.6g subopt=%s", label, t, trail[-1].samples, gap, subopt)

    if not np.all(np.isfinite(x)) or (s is not None and not np.all(np.isfinite(s))):
        raise NonFiniteIterate("final primal iterate is not finite")

    x_avg, y_avg, s_avg = acc.finalize(x, y_sampler, s)
    gap = trail[-1].gap if trail and trail[-1].t == schedule.T else problem.gap(x_avg, y_avg, s_avg)
    wall_ms = (time.perf_counter() - started) * 1000.0
    logger.info("%s done: T=%d samples=%d gap=%.6g (%.0f ms)", label, schedule.T, counter.count - start_samples, gap, wall_ms)

    return SolveReport(
        mode=label,
        eps=schedule.eps,
        seed=root.seed,
        T=schedule.T,
        samples=counter.count - start_samples,
        gap=gap,
        x=x_avg,
        y=y_avg,
        s=s_avg,
        checkpoints=trail,
        accumulator=mode,
        wall_ms=wall_ms,
        trace=records,
    )
