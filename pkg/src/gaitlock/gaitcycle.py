"""Gait period estimation and cycle partitioning from bounding-box widths.

The silhouette's box is widest when the legs are farthest apart, so the
per-frame width traces a quasi-periodic signal. Its normalized
autocorrelation gives the period; cycles are anchored at the first width
maximum and tiled forward.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientCycles, NoPeriodicity, SequenceTooShort

MIN_PERIOD = 4
PEAK_THRESHOLD = 0.3


@dataclass(frozen=True)
class WidthSignal:
    """Per-frame bounding-box width in pixels (0 where no silhouette)."""

    values: np.ndarray
    fps: float

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.values.ndim != 1:
            raise ValueError("width signal must be 1-D")
        if not self.fps > 0:
            raise ValueError("fps must be positive")

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class GaitCycle:
    """One period of frames, inclusive indices."""

    start_frame: int
    end_frame: int
    period_frames: int

    def __post_init__(self):
        if self.period_frames < MIN_PERIOD:
            raise ValueError(f"degenerate period {self.period_frames} < {MIN_PERIOD}")
        if self.end_frame - self.start_frame + 1 != self.period_frames:
            raise ValueError("cycle bounds do not span period_frames frames")


def width_signal(masks, fps: float) -> WidthSignal:
    """Width signal of a silhouette sequence."""
    widths = [0 if m.bbox is None else m.bbox.width for m in masks]
    return WidthSignal(np.asarray(widths, dtype=np.float64), fps)


def autocorrelation(values: np.ndarray, max_lag: int) -> np.ndarray:
    """Normalized autocorrelation r(0..max_lag) of the mean-subtracted signal."""
    x = np.asarray(values, dtype=np.float64)
    x = x - x.mean()
    denom = float(np.dot(x, x))
    if denom == 0.0:
        raise NoPeriodicity("signal has zero variance")
    r = np.empty(max_lag + 1)
    r[0] = 1.0
    for k in range(1, max_lag + 1):
        r[k] = float(np.dot(x[:-k], x[k:])) / denom
    return r


def estimate_period(signal: WidthSignal) -> int:
    """Lag of the first autocorrelation local maximum reaching the
    acceptance threshold, searched over lags [4, n/2].
    """
    n = len(signal)
    if n < 3 * MIN_PERIOD:
        raise SequenceTooShort(f"period estimation needs >= {3 * MIN_PERIOD} frames, got {n}")
    max_search = n // 2
    r = autocorrelation(signal.values, min(max_search + 1, n - 1))
    for k in range(MIN_PERIOD, max_search + 1):
        if r[k] < PEAK_THRESHOLD:
            continue
        left = r[k - 1]
        right = r[k + 1] if k + 1 < r.size else -np.inf
        if r[k] >= left and r[k] >= right:
            return k
    raise NoPeriodicity("no autocorrelation peak reached the acceptance threshold")


def _smooth3(values: np.ndarray) -> np.ndarray:
    n = values.size
    out = np.empty(n)
    for i in range(n):
        out[i] = values[max(0, i - 1):min(n, i + 2)].mean()
    return out


def _first_peak(values: np.ndarray) -> int:
    n = values.size
    for i in range(n):
        left_ok = i == 0 or values[i] >= values[i - 1]
        right_ok = i == n - 1 or values[i] >= values[i + 1]
        if left_ok and right_ok:
            return i
    return 0


def partition_cycles(signal: WidthSignal, period: int) -> list[GaitCycle]:
    """Tile cycles of the given period from the first width maximum of the
    3-frame-smoothed signal; trailing partial cycles are dropped.
    """
    if period < MIN_PERIOD:
        raise ValueError(f"period must be >= {MIN_PERIOD}")
    n = len(signal)
    if n < period:
        raise SequenceTooShort(f"signal of {n} frames is shorter than one period ({period})")
    anchor = _first_peak(_smooth3(signal.values))
    cycles = []
    start = anchor
    while start + period - 1 <= n - 1:
        cycles.append(GaitCycle(start, start + period - 1, period))
        start += period
    return cycles


def select_feature_window(cycles: list[GaitCycle]) -> list[GaitCycle]:
    """The first two complete cycles: the window features are computed over."""
    if len(cycles) < 2:
        raise InsufficientCycles(f"need 2 complete cycles, found {len(cycles)}")
    return list(cycles[:2])
