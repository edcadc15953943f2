"""Clearness luminance index and the single-sample onset rule."""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from nimbus import _kernels
from nimbus import constants as C
from nimbus.errors import DomainError, NightError


@dataclass(frozen=True)
class IndexSample:
    timestamp: datetime
    index: float
    minutes_to_nearest_rain: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.index) and self.index >= 0.0):
            raise DomainError(f"index must be finite and non-negative, got {self.index}")


@dataclass(frozen=True)
class DetectionConfig:
    critical_index: float = C.CRITICAL_INDEX
    daylight_max_zenith: float = C.DAYLIGHT_MAX_ZENITH

    def __post_init__(self):
        if not 0.0 < self.critical_index <= 1.0:
            raise DomainError(f"critical index {self.critical_index} outside (0, 1]")
        if not 0.0 < self.daylight_max_zenith <= 90.0:
            raise DomainError(f"daylight zenith limit {self.daylight_max_zenith} outside (0, 90]")


def clearness_index(l_m: float, l_c: float, eps: float = C.NIGHT_EPSILON) -> float:
    """Measured over clear-sky luminance. Values above 1 are kept as-is."""
    if l_m < 0.0:
        raise DomainError(f"measured luminance must be non-negative, got {l_m}")
    if not l_c > eps:
        raise NightError(f"clear-sky luminance {l_c} too small for an index")
    return l_m / l_c


def clearness_index_series(l_m, l_c, eps: float = C.NIGHT_EPSILON):
    """Vectorised index; entries with ``l_c <= eps`` come back as NaN."""
    l_m = np.asarray(l_m, dtype=np.float64)
    l_c = np.asarray(l_c, dtype=np.float64)
    out = np.full(np.broadcast(l_m, l_c).shape, np.nan)
    ok = l_c > eps
    np.divide(l_m, l_c, out=out, where=ok)
    return out


def detect_onset(i: float, cfg: DetectionConfig = DetectionConfig()) -> bool:
    if not (math.isfinite(i) and i >= 0.0):
        raise DomainError(f"index must be finite and non-negative, got {i}")
    return i < cfg.critical_index


def minutes_to_nearest_event(t: datetime, events) -> float | None:
    """Signed minutes from ``t`` to the closest rain event.

    Negative before an onset, positive after an end, zero inside an event.
    ``None`` when there are no events. If ``t`` sits exactly halfway between
    two events the earlier one wins, giving a positive value.
    """
    if not events:
        return None
    starts = np.array([e.start.timestamp() for e in events])
    ends = np.array([e.end.timestamp() for e in events])
    d = _kernels.signed_distance(np.array([t.timestamp()]), starts, ends)
    return float(d[0]) / 60.0


def minutes_to_nearest_event_series(epoch_s, events) -> np.ndarray:
    epoch_s = np.asarray(epoch_s, dtype=np.float64)
    if not events:
        return np.full(epoch_s.shape, np.nan)
    starts = np.array([e.start.timestamp() for e in events])
    ends = np.array([e.end.timestamp() for e in events])
    return _kernels.signed_distance(epoch_s, starts, ends) / 60.0
