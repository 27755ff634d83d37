"""
mdp_smd.framework.report
~~~~~~~~~~~~~~~~~~~~~~~~
Solve results and their file formats.

JSON::

    {"mode": ..., "eps": ..., "seed": ..., "T": ..., "samples": ...,
     "checkpoints": [{"t": ..., "samples": ..., "gap": ..., "subopt": ...}],
     "policy": [[...]] | null, "wall_ms": ..., ...extra fields}

CSV (RFC-4180, LF line endings)::

    t,samples,gap,subopt

``wall_ms`` is the only non-deterministic field; pass
``include_timing=False`` for byte-stable reports.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

CSV_HEADER = ("t", "samples", "gap", "subopt")


@dataclass
class Checkpoint:
    t: int
    samples: int
    gap: float
    subopt: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "samples": self.samples,
            "gap": float(self.gap),
            "subopt": None if self.subopt is None else float(self.subopt),
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


@dataclass
class SolveReport:
    mode: str
    eps: Optional[float]
    seed: int
    T: int
    samples: int
    gap: float
    x: np.ndarray
    y: np.ndarray
    s: Optional[np.ndarray] = None
    checkpoints: List[Checkpoint] = field(default_factory=list)
    policy: Optional[List[List[float]]] = None
    accumulator: str = "lazy"
    wall_ms: float = 0.0
    extra: Dict[str, Any] = field(default_factory=dict)
    trace: Optional[List[Dict[str, np.ndarray]]] = None

    @property
    def final_subopt(self) -> Optional[float]:
        return self.checkpoints[-1].subopt if self.checkpoints else None

    def to_dict(self, include_timing: bool = True, include_iterates: bool = False) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "mode": self.mode,
            "eps": self.eps,
            "seed": self.seed,
            "T": self.T,
            "samples": self.samples,
            "accumulator": self.accumulator,
            "final_gap": float(self.gap),
            "checkpoints": [c.to_dict() for c in self.checkpoints],
            "policy": self.policy,
        }
        if include_timing:
            data["wall_ms"] = round(float(self.wall_ms), 3)
        data.update(self.extra)
        if include_iterates:
            data["x"] = self.x
            data["y"] = self.y
            if self.s is not None:
                data["s"] = self.s
        return _jsonable(data)

    def to_json(self, include_timing: bool = True, include_iterates: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing, include_iterates), indent=2) + "\n"

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for c in self.checkpoints:
            writer.writerow([
                c.t,
                c.samples,
                repr(float(c.gap)),
                "" if c.subopt is None else repr(float(c.subopt)),
            ])
        return buf.getvalue()

    def write_json(self, path, include_timing: bool = True) -> None:
        Path(path).write_text(self.to_json(include_timing), encoding="utf-8")

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.csv_text())
