"""Synthetic sky-camera days with planted rain events.

The index trace is a V around each event: clear level far away, a linear
descent over ``v_ramp_minutes`` to the rain level at onset, flat through the
event, and a mirrored recovery. Overlapping V's combine by taking the darker
one. Measured luminance is the index times the camera's clear-sky luminance,
written out as uniform gray 8-bit tiles or as a luminance CSV.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from pathlib import Path

import numpy as np

from nimbus import constants as C
from nimbus.calibration import RainEvent
from nimbus.errors import ConfigError
from nimbus.ingest import (
    DEFAULT_PATTERN,
    LUMINANCE_HEADER,
    Dataset,
    GaugeRecord,
    format_timestamp,
    gauge_csv_text,
    tz,
)
from nimbus.luminance import LuminanceCalibration, SkyImage
from nimbus.solar import GeoLocation, ghi_series

# camera response: a clear noon sun at zenith 0 reads as luminance 0.7
DEFAULT_CAMERA_SCALE = 0.7 / 1005.9


class ScenarioError(ConfigError):
    module = "synth"


@dataclass(frozen=True)
class ScenarioConfig:
    day: date = date(2015, 12, 11)
    location: GeoLocation = field(default_factory=lambda: GeoLocation(C.NTU_LATITUDE, C.NTU_LONGITUDE))
    tz_offset_min: int = C.SINGAPORE_TZ_OFFSET_MIN
    n_events: int = 3
    event_minutes: tuple[int, ...] = (30,)
    clear_index_level: float = 1.0
    rain_index_level: float = 0.02
    v_ramp_minutes: float = 240.0
    noise_sigma: float = 0.0
    seed: int = 0
    step_minutes: int = C.CAPTURE_INTERVAL_MIN
    image_offset_s: int = 2
    gauge_step_minutes: int = 1
    event_span_hours: tuple[float, float] = (9.0, 17.0)
    event_margin_minutes: int = 15
    image_size: int = 64
    camera_scale: float = DEFAULT_CAMERA_SCALE

    def __post_init__(self):
        if not 0.0 <= self.rain_index_level < self.clear_index_level:
            raise ScenarioError("need 0 <= rain_index_level < clear_index_level")
        if self.v_ramp_minutes < 0:
            raise ScenarioError("v_ramp_minutes must be >= 0")
        if self.noise_sigma < 0:
            raise ScenarioError("noise_sigma must be >= 0")
        if self.n_events < 0:
            raise ScenarioError("n_events must be >= 0")
        if not self.event_minutes or any(m < 0 for m in self.event_minutes):
            raise ScenarioError("event_minutes must be non-empty and non-negative")
        if self.step_minutes < 1 or self.gauge_step_minutes < 1 or self.image_size < 1:
            raise ScenarioError("cadences and image size must be positive")
        if not self.camera_scale > 0:
            raise ScenarioError("camera_scale must be positive")
        lo, hi = self.event_span_hours
        if not 0 <= lo < hi <= 24:
            raise ScenarioError("event_span_hours must satisfy 0 <= start < end <= 24")
        slot = (hi - lo) * 60.0 / max(self.n_events, 1)
        if self.n_events and max(self.event_minutes) + 2 * self.event_margin_minutes > slot:
            raise ScenarioError(f"{self.n_events} events do not fit in the event span")

    def duration(self, k: int) -> int:
        return self.event_minutes[k % len(self.event_minutes)]


@dataclass
class SyntheticDay:
    config: ScenarioConfig
    image_times: list[datetime]
    index: np.ndarray
    l_m: np.ndarray
    gauge: list[GaugeRecord]
    events: list[RainEvent]

    @property
    def calibration(self) -> LuminanceCalibration:
        return LuminanceCalibration(self.config.camera_scale)


def _local_midnight(cfg: ScenarioConfig) -> datetime:
    return datetime.combine(cfg.day, time(0, 0), tzinfo=tz(cfg.tz_offset_min)).astimezone(timezone.utc)


def plant_events(cfg: ScenarioConfig, rng: np.random.Generator) -> list[tuple[datetime, datetime]]:
    """One event per equal slot of the event span, start on a whole minute."""
    midnight = _local_midnight(cfg)
    lo, hi = cfg.event_span_hours
    slot = (hi - lo) * 60.0 / max(cfg.n_events, 1)
    out = []
    for k in range(cfg.n_events):
        dur = cfg.duration(k)
        first = int(np.ceil(lo * 60 + k * slot + cfg.event_margin_minutes))
        last = int(np.floor(lo * 60 + (k + 1) * slot - cfg.event_margin_minutes - dur))
        start = int(rng.integers(first, last + 1))
        out.append((midnight + timedelta(minutes=start), midnight + timedelta(minutes=start + dur)))
    return out


def index_trace(cfg: ScenarioConfig, spans, epoch_s) -> np.ndarray:
    """Noise-free index at the given UTC epoch seconds."""
    t = np.asarray(epoch_s, dtype=np.float64)
    depth = np.zeros(t.shape)
    for start, end in spans:
        s, e = start.timestamp(), end.timestamp()
        gap = np.where(t < s, s - t, np.where(t > e, t - e, 0.0)) / 60.0
        if cfg.v_ramp_minutes > 0:
            v = np.clip(1.0 - gap / cfg.v_ramp_minutes, 0.0, 1.0)
        else:
            v = (gap == 0.0).astype(np.float64)
        depth = np.maximum(depth, v)
    # endpoints exact: depth 0 gives the clear level, depth 1 the rain level
    return cfg.clear_index_level * (1.0 - depth) + cfg.rain_index_level * depth


def generate(cfg: ScenarioConfig) -> SyntheticDay:
    """Build one synthetic day. Identical configs give identical days."""
    rng = np.random.default_rng(cfg.seed)
    spans = plant_events(cfg, rng)
    midnight = _local_midnight(cfg)

    n_img = 24 * 60 // cfg.step_minutes
    image_times = [midnight + timedelta(minutes=k * cfg.step_minutes, seconds=cfg.image_offset_s)
                   for k in range(n_img)]
    epoch = np.array([t.timestamp() for t in image_times])
    index = index_trace(cfg, spans, epoch)
    if cfg.noise_sigma > 0:
        index = np.maximum(index + rng.normal(0.0, cfg.noise_sigma, index.shape), 0.0)
    _, _, g_c = ghi_series(cfg.location, epoch)
    l_m = np.clip(index * cfg.camera_scale * g_c, 0.0, 1.0)

    gauge = []
    events = []
    n_gauge = 24 * 60 // cfg.gauge_step_minutes
    rates = rng.uniform(1.0, 40.0, size=(len(spans), n_gauge))
    wet_rate = np.zeros(n_gauge)
    for k, (s, e) in enumerate(spans):
        m0 = int((s - midnight).total_seconds() // 60)
        m1 = int((e - midnight).total_seconds() // 60)
        ticks = [j for j in range(n_gauge) if m0 <= j * cfg.gauge_step_minutes <= m1]
        wet_rate[ticks] = np.round(rates[k, ticks], 2)
        events.append(RainEvent(s, e, float(wet_rate[ticks].max()) if ticks else 1.0))
    for j in range(n_gauge):
        gauge.append(GaugeRecord(midnight + timedelta(minutes=j * cfg.gauge_step_minutes),
                                 float(wet_rate[j])))
    return SyntheticDay(cfg, image_times, index, l_m, gauge, events)


def gray_level(l_m: float) -> int:
    return int(np.clip(np.rint(l_m * 255.0), 0, 255))


def write_dataset(day: SyntheticDay, out_dir, fmt: str = "images") -> Dataset:
    """Write manifest, gauge log, truth events, and images or a luminance CSV.

    Files are written in a fixed order with deterministic content so a second
    run over the same config is byte-identical.
    """
    if fmt not in ("images", "csv"):
        raise ScenarioError(f"unknown output format {fmt!r}")
    cfg = day.config
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    ds = Dataset(
        location=cfg.location,
        tz_offset_min=cfg.tz_offset_min,
        pattern=DEFAULT_PATTERN,
        gauge_file="gauge.csv",
        calibration=day.calibration,
        crop_side=cfg.image_size,
        start=format_timestamp(day.image_times[0], cfg.tz_offset_min),
        end=format_timestamp(day.image_times[-1], cfg.tz_offset_min),
    )
    local = tz(cfg.tz_offset_min)
    if fmt == "images":
        img_dir = out / "images"
        img_dir.mkdir(exist_ok=True)
        ds.images_dir = "images"
        n = cfg.image_size
        for t, lum in zip(day.image_times, day.l_m):
            name = t.astimezone(local).strftime(DEFAULT_PATTERN) + ".png"
            g = gray_level(lum)
            SkyImage.uniform(n, n, (g, g, g), t).save(img_dir / name)
            ds.images.append(name)
    else:
        ds.luminance_file = "luminance.csv"
        rows = [",".join(LUMINANCE_HEADER)]
        rows += [f"{format_timestamp(t, cfg.tz_offset_min)},{float(v)!r}"
                 for t, v in zip(day.image_times, day.l_m)]
        (out / "luminance.csv").write_text("\n".join(rows) + "\n")

    (out / "gauge.csv").write_text(gauge_csv_text(day.gauge, cfg.tz_offset_min))
    truth = [{"start": format_timestamp(e.start, cfg.tz_offset_min),
              "end": format_timestamp(e.end, cfg.tz_offset_min),
              "peak_rate": e.peak_rate} for e in day.events]
    (out / "truth_events.json").write_text(json.dumps(truth, indent=2) + "\n")
    (out / "manifest.json").write_text(ds.to_json())
    return ds
