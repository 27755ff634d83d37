"""
mdp_smd.framework.accumulator
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Running averages of the SMD iterates.

Dense mode adds every block in full at every iteration: O(n + m) per step,
kept as the reference.

Lazy mode only touches the coordinates an iteration changes:

  box        coordinate k, unchanged since count τ_k, contributes
             x_k·(t − τ_k); flushed when k is about to change.
  dual       the weights are unnormalised and y_t = w/S_t. With the prefix
             sum H_t = Σ_{τ≤t} 1/S_τ an untouched weight contributes
             w_k·(H_t − H_{τ_k}). A rescale of all weights flushes every
             coordinate and restarts H at zero.
  capped     always dense (K is small).
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from ..exceptions import ConfigError

MODES = ("dense", "lazy")


class IterateAccumulator:
    def __init__(self, mode: str, n: int, m: int, k: Optional[int] = None) -> None:
        if mode not in MODES:
            raise ConfigError(f"accumulator mode must be one of {MODES}, got {mode!r}")
        self.mode = mode
        self.count = 0
        self._x_sum = np.zeros(n)
        self._y_sum = np.zeros(m)
        self._s_sum = None if k is None else np.zeros(k)
        if mode == "lazy":
            self._x_last = np.zeros(n, dtype=np.int64)
            self._h = 0.0
            self._h_last = np.zeros(m)

    # ── per-iteration hooks ──────────────────────────────────────────────

    def record(self, x: np.ndarray, y_sampler, s: Optional[np.ndarray] = None) -> None:
        """Add the current iterate to the running sums."""
        self.count += 1
        if self.mode == "dense":
            self._x_sum += x
            w = y_sampler.weights()
            self._y_sum += w / w.sum()
        else:
            self._h += 1.0 / y_sampler.total
        if s is not None:
            self._s_sum += s

    def before_box_change(self, k: int, old_value: float) -> None:
        if self.mode == "lazy":
            self._x_sum[k] += old_value * (self.count - self._x_last[k])
            self._x_last[k] = self.count

    def before_box_rewrite(self, x: np.ndarray) -> None:
        """Flush every box coordinate (dense box updates)."""
        if self.mode == "lazy":
            self._x_sum += x * (self.count - self._x_last)
            self._x_last[:] = self.count

    def before_dual_change(self, k: int, old_weight: float) -> None:
        if self.mode == "lazy":
            self._y_sum[k] += old_weight * (self._h - self._h_last[k])
            self._h_last[k] = self._h

    def before_dual_rescale(self, weights: np.ndarray) -> None:
        if self.mode == "lazy":
            self._y_sum += weights * (self._h - self._h_last)
            self._h = 0.0
            self._h_last[:] = 0.0

    # ── read-out ─────────────────────────────────────────────────────────

    def snapshot(
        self, x: np.ndarray, y_sampler, s: Optional[np.ndarray] = None
    ) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
        """Averages over the iterates recorded so far; does not mutate."""
        if self.count == 0:
            w = y_sampler.weights()
            return x.copy(), w / w.sum(), None if s is None else s.copy()
        if self.mode == "dense":
            x_sum = self._x_sum
            y_sum = self._y_sum
        else:
            x_sum = self._x_sum + x * (self.count - self._x_last)
            y_sum = self._y_sum + y_sampler.weights() * (self._h - self._h_last)
        x_avg = x_sum / self.count
        y_avg = y_sum / self.count
        # The dual average is a convex combination; renormalise rounding.
        y_avg = y_avg / y_avg.sum()
        s_avg = None if self._s_sum is None else self._s_sum / self.count
        return x_avg, y_avg, s_avg

    def finalize(self, x: np.ndarray, y_sampler, s: Optional[np.ndarray] = None):
        return self.snapshot(x, y_sampler, s)
