"""Threshold calibration: rain events, window labels, CDFs, OC curve, elbow."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Iterable, Sequence

import numpy as np

from nimbus import _kernels
from nimbus import constants as C
from nimbus.errors import CalibrationError, DomainError, InputError


@dataclass(frozen=True)
class RainEvent:
    start: datetime
    end: datetime
    peak_rate: float

    def __post_init__(self):
        if self.start > self.end:
            raise DomainError(f"event start {self.start} after end {self.end}")
        if not self.peak_rate > 0.0:
            raise DomainError(f"event peak rate must be positive, got {self.peak_rate}")

    def to_dict(self) -> dict:
        return {"start": self.start.isoformat(), "end": self.end.isoformat(),
                "peak_rate": self.peak_rate}

    @classmethod
    def from_dict(cls, d: dict) -> "RainEvent":
        return cls(datetime.fromisoformat(d["start"]), datetime.fromisoformat(d["end"]),
                   float(d["peak_rate"]))


@dataclass(frozen=True)
class LabeledSample:
    index: float
    within_window: bool

    def __post_init__(self):
        if not self.index >= 0.0:
            raise DomainError(f"index must be non-negative, got {self.index}")


@dataclass(frozen=True)
class OcPoint:
    threshold: float
    pct_within_below: float
    pct_outside_below: float


def build_events(gauge: Iterable, merge_gap: float = C.EVENT_MERGE_GAP_MIN) -> list[RainEvent]:
    """Group positive-rate gauge records into rain events.

    Args:
        gauge: ``(timestamp, rate)`` pairs or objects with ``timestamp`` and
            ``rate`` attributes, sorted by time.
        merge_gap: runs whose gap (last wet record to next wet record) is at
            most this many minutes are joined.

    Returns:
        Events spanning first to last wet record, each with its peak rate.
    """
    records = [(r.timestamp, r.rate) if hasattr(r, "rate") else (r[0], r[1]) for r in gauge]
    for k in range(1, len(records)):
        if records[k][0] < records[k - 1][0]:
            raise InputError(f"gauge series not sorted at record {k}: "
                             f"{records[k][0].isoformat()} < {records[k - 1][0].isoformat()}")
    if any(rate < 0 for _, rate in records):
        raise InputError("gauge rates must be non-negative")

    gap = timedelta(minutes=merge_gap)
    events: list[list] = []
    prev_wet = False
    for t, rate in records:
        if rate <= 0.0:
            prev_wet = False
            continue
        # consecutive wet records always share a run, whatever the cadence
        if events and (prev_wet or t - events[-1][1] <= gap):
            events[-1][1] = t
            events[-1][2] = max(events[-1][2], rate)
        else:
            events.append([t, t, rate])
        prev_wet = True
    return [RainEvent(s, e, p) for s, e, p in events]


def event_bounds(events: Sequence[RainEvent]) -> tuple[np.ndarray, np.ndarray]:
    starts = np.array([e.start.timestamp() for e in events], dtype=np.float64)
    ends = np.array([e.end.timestamp() for e in events], dtype=np.float64)
    return starts, ends


def window_mask(epoch_s, events: Sequence[RainEvent], window: float = C.RAIN_WINDOW_MIN):
    """True where a timestamp lies in ``[start - window, end + window]`` of any event."""
    if window < 0:
        raise DomainError(f"window must be non-negative, got {window}")
    starts, ends = event_bounds(events)
    return _kernels.in_any_interval(np.asarray(epoch_s, np.float64),
                                    starts - 60.0 * window, ends + 60.0 * window)


def label_samples(samples, events: Sequence[RainEvent],
                  window: float = C.RAIN_WINDOW_MIN) -> list[LabeledSample]:
    samples = list(samples)
    t = np.array([s.timestamp.timestamp() for s in samples], dtype=np.float64)
    mask = window_mask(t, events, window)
    return [LabeledSample(s.index, bool(m)) for s, m in zip(samples, mask)]


class EmpiricalCDF:
    """Right-continuous step function ``x -> fraction of values <= x``."""

    def __init__(self, values):
        v = np.sort(np.asarray(values, dtype=np.float64).ravel())
        if v.size == 0:
            raise DomainError("empirical CDF of an empty sample")
        if np.any(np.isnan(v)):
            raise DomainError("empirical CDF input contains NaN")
        self.values = v

    def __len__(self):
        return self.values.size

    def __call__(self, x):
        r = np.searchsorted(self.values, x, side="right") / self.values.size
        return float(r) if np.ndim(r) == 0 else r

    def below(self, x):
        """Fraction strictly less than ``x``, i.e. the left limit at ``x``."""
        r = _kernels.count_below(self.values, np.atleast_1d(np.asarray(x, np.float64)))
        r = r / self.values.size
        return float(r[0]) if np.ndim(x) == 0 else r


def empirical_cdf(values) -> EmpiricalCDF:
    return EmpiricalCDF(values)


def threshold_grid(start: float = C.GRID_START, end: float = C.GRID_END,
                   step: float = C.GRID_STEP) -> np.ndarray:
    """Inclusive grid ``start, start+step, ..., end`` without float drift."""
    if not step > 0 or end < start:
        raise DomainError(f"bad threshold grid start={start} end={end} step={step}")
    n = int(np.floor((end - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 12)


def oc_counts(index, within, thresholds):
    """Below-threshold counts per class; returns ``(n_within, n_outside, c_within, c_outside)``."""
    index = np.asarray(index, dtype=np.float64)
    within = np.asarray(within, dtype=bool)
    inside = np.sort(index[within])
    outside = np.sort(index[~within])
    if inside.size == 0 or outside.size == 0:
        raise CalibrationError(
            f"OC curve needs both classes (within={inside.size}, outside={outside.size})")
    th = np.asarray(thresholds, dtype=np.float64)
    return inside.size, outside.size, _kernels.count_below(inside, th), _kernels.count_below(outside, th)


def oc_curve(labeled: Sequence[LabeledSample], thresholds=None) -> list[OcPoint]:
    """Percent of each class strictly below every threshold in the grid."""
    th = threshold_grid() if thresholds is None else np.asarray(thresholds, dtype=np.float64)
    idx = [s.index for s in labeled]
    win = [s.within_window for s in labeled]
    n_in, n_out, c_in, c_out = oc_counts(idx, win, th)
    return [OcPoint(float(t), 100.0 * int(a) / n_in, 100.0 * int(b) / n_out)
            for t, a, b in zip(th, c_in, c_out)]


def select_elbow(curve: Sequence[OcPoint], rtol: float = 1e-9) -> float:
    """Threshold of the point farthest from the first-to-last chord.

    Points are taken as ``(pct_outside_below, pct_within_below)``. Distances
    within ``rtol`` of the maximum count as ties and go to the smallest
    threshold.
    """
    if len(curve) < 3:
        raise CalibrationError(f"elbow selection needs at least 3 points, got {len(curve)}")
    th = np.array([p.threshold for p in curve])
    if np.any(np.diff(th) <= 0):
        raise CalibrationError("OC curve must be sorted by increasing threshold")
    x = np.array([p.pct_outside_below for p in curve])
    y = np.array([p.pct_within_below for p in curve])
    dx, dy = x[-1] - x[0], y[-1] - y[0]
    norm = np.hypot(dx, dy)
    if norm == 0.0:
        dist = np.hypot(x - x[0], y - y[0])
    else:
        dist = np.abs(dx * (y - y[0]) - dy * (x - x[0])) / norm
    best = dist.max()
    scale = max(np.abs(x).max(), np.abs(y).max(), 1e-300)
    k = int(np.flatnonzero(dist >= best - rtol * scale)[0])
    return float(th[k])
