"""Loading and time-aligning sky-image directories and rain-gauge logs."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from nimbus import _kernels
from nimbus import constants as C
from nimbus.errors import IngestionError, InputError
from nimbus.luminance import LuminanceCalibration
from nimbus.solar import GeoLocation

DEFAULT_PATTERN = "%Y-%m-%d-%H-%M-%S"
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
GAUGE_HEADER = ["timestamp", "rain_mm_per_hr"]
LUMINANCE_HEADER = ["timestamp", "l_m"]


def tz(offset_min: int) -> timezone:
    return timezone(timedelta(minutes=offset_min))


def parse_timestamp(text: str) -> datetime:
    """ISO-8601 with an explicit offset (``Z`` accepted), returned in UTC."""
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    t = datetime.fromisoformat(text)
    if t.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no UTC offset")
    return t.astimezone(timezone.utc)


def format_timestamp(t: datetime, offset_min: int = 0) -> str:
    return t.astimezone(tz(offset_min)).isoformat()


@dataclass(frozen=True)
class GaugeRecord:
    timestamp: datetime
    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate >= 0.0):
            raise InputError(f"gauge rate must be finite and non-negative, got {self.rate}")


@dataclass(frozen=True)
class ImageRef:
    path: Path
    timestamp: datetime


def _check_strict(times, what, names=None):
    for k in range(1, len(times)):
        if times[k] <= times[k - 1]:
            if names is not None and times[k] == times[k - 1]:
                raise IngestionError(
                    f"duplicate {what} timestamp {times[k].isoformat()}: "
                    f"{names[k - 1]} and {names[k]}")
            raise IngestionError(f"{what} timestamps not strictly increasing at "
                                 f"{times[k].isoformat()}")


def scan_images(directory, pattern: str = DEFAULT_PATTERN, tz_offset_min: int = 0):
    """Find timestamped sky images in ``directory``.

    The timestamp is parsed from the start of each file name using the
    ``strftime`` ``pattern`` and interpreted at ``tz_offset_min`` from UTC.

    Returns:
        ``(refs, skipped)``: references sorted by time, and the names of files
        that were not images or whose names did not parse.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise IngestionError(f"image directory {directory} not found")
    width = len(datetime(2000, 1, 1).strftime(pattern))
    refs, skipped = [], []
    for p in sorted(directory.iterdir(), key=lambda q: q.name):
        if not p.is_file() or p.suffix.lower() not in IMAGE_SUFFIXES:
            skipped.append(p.name)
            continue
        try:
            local = datetime.strptime(p.name[:width], pattern)
        except ValueError:
            skipped.append(p.name)
            continue
        refs.append(ImageRef(p, local.replace(tzinfo=tz(tz_offset_min)).astimezone(timezone.utc)))
    if not refs:
        raise IngestionError(f"no parseable images in {directory}")
    refs.sort(key=lambda r: (r.timestamp, r.path.name))
    _check_strict([r.timestamp for r in refs], "image", [r.path.name for r in refs])
    return refs, skipped


def _read_rows(path, header):
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None or [h.strip() for h in first] != header:
            raise IngestionError(f"{path}: expected header {','.join(header)}, got {first}")
        for row in reader:
            if row:
                yield reader.line_num, row


def parse_gauge_csv(path) -> list[GaugeRecord]:
    """Read a ``timestamp,rain_mm_per_hr`` log into time-sorted records."""
    records = []
    for line, row in _read_rows(path, GAUGE_HEADER):
        try:
            if len(row) != 2:
                raise ValueError(f"expected 2 fields, got {len(row)}")
            t = parse_timestamp(row[0])
            rate = float(row[1])
            rec = GaugeRecord(t, rate)
        except (ValueError, InputError) as exc:
            raise IngestionError(f"{path}:{line}: {exc}") from exc
        records.append(rec)
    records.sort(key=lambda r: r.timestamp)
    _check_strict([r.timestamp for r in records], "gauge")
    return records


def write_gauge_csv(records, path, tz_offset_min: int = 0) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write(gauge_csv_text(records, tz_offset_min))


def gauge_csv_text(records, tz_offset_min: int = 0) -> str:
    lines = [",".join(GAUGE_HEADER)]
    lines += [f"{format_timestamp(r.timestamp, tz_offset_min)},{r.rate!r}" for r in records]
    return "\n".join(lines) + "\n"


def parse_luminance_csv(path) -> tuple[list[datetime], np.ndarray]:
    times, values = [], []
    for line, row in _read_rows(path, LUMINANCE_HEADER):
        try:
            t, v = parse_timestamp(row[0]), float(row[1])
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"luminance {v} outside [0, 1]")
        except (ValueError, IndexError) as exc:
            raise IngestionError(f"{path}:{line}: {exc}") from exc
        times.append(t)
        values.append(v)
    if not times:
        raise IngestionError(f"{path}: no luminance rows")
    order = sorted(range(len(times)), key=times.__getitem__)
    times = [times[k] for k in order]
    _check_strict(times, "luminance")
    return times, np.asarray(values, dtype=np.float64)[order]


@dataclass(frozen=True)
class Alignment:
    """Per-image match into the gauge series (``gauge_index`` is -1 if unmatched)."""

    gauge_index: np.ndarray
    delta_s: np.ndarray
    rate: np.ndarray

    @property
    def matched(self) -> np.ndarray:
        return self.gauge_index >= 0


def _epoch(times) -> np.ndarray:
    if len(times) and isinstance(times[0], datetime):
        return np.array([t.timestamp() for t in times], dtype=np.float64)
    if len(times) and hasattr(times[0], "timestamp"):
        return np.array([t.timestamp.timestamp() for t in times], dtype=np.float64)
    return np.asarray(times, dtype=np.float64)


def align(images, gauge, tolerance: float = C.ALIGN_TOLERANCE_S) -> Alignment:
    """Match each image time to the nearest gauge record within ``tolerance`` seconds.

    ``images`` and ``gauge`` may be datetimes, objects with a ``timestamp``
    attribute, or epoch seconds. Equidistant gauge records resolve to the
    earlier one.
    """
    q = _epoch(list(images))
    g = _epoch(list(gauge))
    if np.any(np.diff(g) < 0) or np.any(np.diff(q) < 0):
        raise InputError("align needs both series sorted by time")
    idx = _kernels.nearest_within(q, g, tolerance)
    ok = idx >= 0
    delta = np.full(q.shape, np.nan)
    delta[ok] = q[ok] - g[idx[ok]]
    rates = np.full(q.shape, np.nan)
    if ok.any() and len(gauge) and hasattr(list(gauge)[0], "rate"):
        rate_arr = np.array([r.rate for r in gauge], dtype=np.float64)
        rates[ok] = rate_arr[idx[ok]]
    return Alignment(idx, delta, rates)


@dataclass
class Dataset:
    """Everything one calibrate/detect run needs, persisted as ``manifest.json``.

    Paths in the manifest are relative to the manifest's directory.
    """

    location: GeoLocation
    tz_offset_min: int = 0
    pattern: str = DEFAULT_PATTERN
    images_dir: str | None = None
    images: list[str] = field(default_factory=list)
    luminance_file: str | None = None
    gauge_file: str | None = None
    calibration: LuminanceCalibration | None = None
    crop_side: int | None = None
    crop_fraction: float | None = None
    start: str | None = None
    end: str | None = None

    def to_json(self) -> str:
        d = {
            "location": {"latitude": self.location.latitude, "longitude": self.location.longitude},
            "tz_offset_min": self.tz_offset_min,
            "pattern": self.pattern,
            "images_dir": self.images_dir,
            "images": list(self.images),
            "luminance_file": self.luminance_file,
            "gauge_file": self.gauge_file,
            "calibration": None if self.calibration is None else self.calibration.to_dict(),
            "crop_side": self.crop_side,
            "crop_fraction": self.crop_fraction,
            "start": self.start,
            "end": self.end,
        }
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Dataset":
        try:
            d = json.loads(text)
            loc = GeoLocation(float(d["location"]["latitude"]), float(d["location"]["longitude"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise IngestionError(f"malformed manifest: {exc}") from exc
        cal = d.get("calibration")
        return cls(
            location=loc,
            tz_offset_min=int(d.get("tz_offset_min", 0)),
            pattern=d.get("pattern", DEFAULT_PATTERN),
            images_dir=d.get("images_dir"),
            images=list(d.get("images") or []),
            luminance_file=d.get("luminance_file"),
            gauge_file=d.get("gauge_file"),
            calibration=None if cal is None else LuminanceCalibration.from_dict(cal),
            crop_side=d.get("crop_side"),
            crop_fraction=d.get("crop_fraction"),
            start=d.get("start"),
            end=d.get("end"),
        )

    @classmethod
    def load(cls, path) -> "Dataset":
        path = Path(path)
        if path.is_dir():
            path = path / "manifest.json"
        try:
            return cls.from_json(path.read_text())
        except OSError as exc:
            raise IngestionError(f"cannot read manifest {path}: {exc}") from exc
