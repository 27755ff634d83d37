"""
mdp_smd.sweep
~~~~~~~~~~~~~
Experiment sweeps over (eps, seed) grids.

Cells run in a thread pool, one solver per cell with its own RngState, and
are merged back in spec order so the CSV does not depend on scheduling::

    task,eps,seed,T,samples_to_target,final_gap,final_subopt
    amdp,0.4,0,4800,1200,0.31,0.02
    ...
    summary,,,,-1.97,,

The summary row carries the log-log slope of median samples-to-target
against eps in the samples_to_target column.

Spec file::

    {"task": "amdp", "eps": [0.4, 0.2, 0.1], "seeds": [0, 1, ...],
     "instance": "inst.json" | null,
     "generator": {"kind": "random_mixing", "params": {...}, "seed": 7} | null,
     "accumulator": "lazy", "iterations": null, "t_mix": null,
     "output": "sweep.csv"}
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .conf import get_config
from .exceptions import ConfigError, InstanceFormatError
from .mdp import generate_instance
from .tasks import Instance, check_task, load_instance, median, run_task, samples_to_target

logger = logging.getLogger("mdp_smd.sweep")

CSV_HEADER = ("task", "eps", "seed", "T", "samples_to_target", "final_gap", "final_subopt")
MIN_EPS = 3
MIN_SEEDS = 10


@dataclass
class ExperimentSpec:
    task: str
    eps: List[float]
    seeds: List[int]
    instance: Optional[str] = None
    generator: Optional[Dict[str, Any]] = None
    accumulator: Optional[str] = None
    iterations: Optional[int] = None
    t_mix: Optional[int] = None
    output: Optional[str] = None

    def __post_init__(self) -> None:
        check_task(self.task)
        self.eps = [float(e) for e in self.eps]
        self.seeds = [int(s) for s in self.seeds]
        bad = [e for e in self.eps if not 0.0 < e < 1.0]
        if bad:
            raise ConfigError(f"eps values must lie in (0, 1), got {bad}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if (self.instance is None) == (self.generator is None):
            raise ConfigError("give exactly one of an instance path or generator params")

    def check_sweepable(self) -> None:
        if len(set(self.eps)) < MIN_EPS or len(self.seeds) < MIN_SEEDS:
            raise ConfigError(
                f"a sweep needs at least {MIN_EPS} eps values and {MIN_SEEDS} seeds, "
                f"got {len(set(self.eps))} and {len(self.seeds)}"
            )

    def build_instance(self) -> Instance:
        if self.instance is not None:
            return load_instance(self.task, self.instance)
        gen = self.generator
        try:
            return generate_instance(gen["kind"], gen.get("params", {}), int(gen.get("seed", 0)))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"generator params must give a kind: {exc}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentSpec":
        try:
            return cls(**data)
        except TypeError as exc:
            raise InstanceFormatError(f"malformed experiment spec: {exc}")

    @classmethod
    def load(cls, path) -> "ExperimentSpec":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InstanceFormatError(f"cannot read experiment spec {path}: {exc}")
        if not isinstance(data, dict):
            raise InstanceFormatError(f"{path} does not hold a JSON object")
        return cls.from_dict(data)


@dataclass
class SweepRow:
    task: str
    eps: float
    seed: int
    T: int
    samples_to_target: Optional[int]
    final_gap: float
    final_subopt: Optional[float]

    def cells(self) -> List[str]:
        return [
            self.task,
            repr(self.eps),
            str(self.seed),
            str(self.T),
            "" if self.samples_to_target is None else str(self.samples_to_target),
            repr(float(self.final_gap)),
            "" if self.final_subopt is None else repr(float(self.final_subopt)),
        ]


@dataclass
class SweepResult:
    rows: List[SweepRow] = field(default_factory=list)
    slope: Optional[float] = None

    def medians(self) -> Dict[float, Optional[float]]:
        by_eps: Dict[float, List[Optional[int]]] = {}
        for row in self.rows:
            by_eps.setdefault(row.eps, []).append(row.samples_to_target)
        return {eps: median(values) for eps, values in by_eps.items()}

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow(row.cells())
        writer.writerow(["summary", "", "", "", "" if self.slope is None else repr(self.slope), "", ""])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.csv_text())


def fit_slope(medians: Dict[float, Optional[float]]) -> Optional[float]:
    """Slope of log(median samples) against log(eps)."""
    points = [(eps, m) for eps, m in medians.items() if m is not None and m > 0]
    if len({eps for eps, _ in points}) < 2:
        return None
    x = np.log([eps for eps, _ in points])
    y = np.log([m for _, m in points])
    return float(np.polyfit(x, y, 1)[0])


def _run_cell(spec: ExperimentSpec, instance: Instance, eps: float, seed: int) -> SweepRow:
    report = run_task(
        spec.task,
        instance,
        eps,
        seed,
        iterations=spec.iterations,
        accumulator=spec.accumulator,
        t_mix=spec.t_mix,
    )
    return SweepRow(
        spec.task, eps, seed, report.T, samples_to_target(report, eps), report.gap, report.final_subopt
    )


def run_sweep(spec: ExperimentSpec, threads: Optional[int] = None, instance: Optional[Instance] = None) -> SweepResult:
    spec.check_sweepable()
    instance = instance if instance is not None else spec.build_instance()
    threads = threads or get_config()["threads"]
    cells: List[Tuple[float, int]] = [(eps, seed) for eps in spec.eps for seed in spec.seeds]
    logger.info("sweep %s: %d cells on %d threads", spec.task, len(cells), threads)

    done: Dict[Tuple[float, int], SweepRow] = {}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {pool.submit(_run_cell, spec, instance, eps, seed): (eps, seed) for eps, seed in cells}
        for future in as_completed(futures):
            done[futures[future]] = future.result()

    result = SweepResult([done[cell] for cell in cells])
    result.slope = fit_slope(result.medians())
    if result.slope is not None and not math.isfinite(result.slope):
        result.slope = None
    logger.info("sweep %s: fitted slope %s", spec.task, result.slope)
    return result
