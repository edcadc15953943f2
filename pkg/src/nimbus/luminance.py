"""Measured image luminance and the modeled clear-sky luminance."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from nimbus import _kernels
from nimbus import constants as C
from nimbus.errors import CalibrationError, DimensionError, DomainError


@dataclass(frozen=True, eq=False)
class SkyImage:
    """An 8-bit RGB frame, stored as a ``(height, width, 3)`` uint8 array."""

    timestamp: datetime | None
    pixels: np.ndarray

    def __post_init__(self):
        px = self.pixels
        if px.ndim != 3 or px.shape[2] != 3:
            raise DimensionError(f"expected (height, width, 3) pixels, got shape {px.shape}")
        if px.dtype != np.uint8:
            raise DomainError(f"expected uint8 pixels, got {px.dtype}")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @classmethod
    def from_file(cls, path, timestamp: datetime | None = None) -> "SkyImage":
        with Image.open(path) as im:
            return cls(timestamp, np.asarray(im.convert("RGB"), dtype=np.uint8))

    @classmethod
    def uniform(cls, width: int, height: int, rgb, timestamp: datetime | None = None) -> "SkyImage":
        px = np.empty((height, width, 3), dtype=np.uint8)
        px[...] = np.asarray(rgb, dtype=np.uint8)
        return cls(timestamp, px)

    def save(self, path) -> None:
        Image.fromarray(self.pixels, mode="RGB").save(Path(path))


@dataclass(frozen=True)
class LuminanceSample:
    timestamp: datetime
    l_m: float
    l_c: float

    def __post_init__(self):
        if not 0.0 <= self.l_m <= 1.0:
            raise DomainError(f"measured luminance {self.l_m} outside [0, 1]")
        if not self.l_c >= 0.0:
            raise DomainError(f"clear-sky luminance {self.l_c} is negative")


@dataclass(frozen=True)
class LuminanceCalibration:
    """Linear map from clear-sky GHI (W/m^2) to normalized image luminance."""

    alpha: float
    beta: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise CalibrationError(f"calibration scale must be positive, got {self.alpha}")

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta}

    @classmethod
    def from_dict(cls, d: dict) -> "LuminanceCalibration":
        return cls(float(d["alpha"]), float(d.get("beta", 0.0)))


def crop_center(img: SkyImage, side: int) -> SkyImage:
    """Centered ``side`` x ``side`` crop.

    When the margin is odd the extra row/column is left on the bottom/right.
    """
    if side < 1:
        raise DimensionError(f"crop side must be >= 1, got {side}")
    limit = min(img.width, img.height)
    if side > limit:
        raise DimensionError(
            f"crop side {side} exceeds smallest image dimension {limit} "
            f"({img.width}x{img.height})"
        )
    top = (img.height - side) // 2
    left = (img.width - side) // 2
    return SkyImage(img.timestamp, img.pixels[top:top + side, left:left + side])


def crop_side_for(img: SkyImage, side: int | None = None, fraction: float | None = None) -> int:
    """Resolve a crop size from an absolute side or a fraction of the short edge."""
    if side is not None and fraction is not None:
        raise DomainError("give either a crop side or a crop fraction, not both")
    if fraction is not None:
        if not 0.0 < fraction <= 1.0:
            raise DomainError(f"crop fraction {fraction} outside (0, 1]")
        return max(1, int(round(fraction * min(img.width, img.height))))
    return C.DEFAULT_CROP_SIDE if side is None else side


def mean_luminance(img: SkyImage, weights: Sequence[float] = C.REC709_WEIGHTS) -> float:
    """Mean Rec. 709 luma of the image, normalized to [0, 1]."""
    if img.pixels.size == 0:
        raise DomainError("cannot take the luminance of an empty image")
    value = _kernels.weighted_mean(img.pixels, weights)
    return min(1.0, max(0.0, value))


def fit_calibration(pairs, affine: bool = False) -> LuminanceCalibration:
    """Least-squares fit of measured luminance against clear-sky GHI.

    Args:
        pairs: ``(g_c, l_m)`` tuples from intervals known to be clear.
        affine: also fit an offset instead of forcing the line through zero.

    Raises:
        CalibrationError: fewer than two pairs, all-equal GHI, non-positive
            GHI, or a non-positive fitted slope.
    """
    arr = np.asarray(list(pairs), dtype=np.float64).reshape(-1, 2)
    if arr.shape[0] < 2:
        raise CalibrationError(f"need at least 2 calibration pairs, got {arr.shape[0]}")
    g, lum = arr[:, 0], arr[:, 1]
    if np.any(g <= 0.0):
        raise CalibrationError("calibration GHI values must be positive")
    if np.ptp(g) == 0.0:
        raise CalibrationError("calibration GHI values are all equal")
    if affine:
        design = np.column_stack([g, np.ones_like(g)])
        (alpha, beta), *_ = np.linalg.lstsq(design, lum, rcond=None)
    else:
        alpha, beta = float(g @ lum / (g @ g)), 0.0
    if not alpha > 0.0:
        raise CalibrationError(f"fitted calibration slope {alpha} is not positive")
    return LuminanceCalibration(float(alpha), float(beta))


def fallback_calibration(l_m, g_c) -> LuminanceCalibration:
    """Scale so the brightest measurement meets the strongest clear-sky GHI."""
    l_m = np.asarray(l_m, dtype=np.float64)
    g_c = np.asarray(g_c, dtype=np.float64)
    if g_c.size == 0 or not np.max(g_c) > 0.0 or not np.max(l_m) > 0.0:
        raise CalibrationError("no daylight samples to derive a fallback calibration from")
    return LuminanceCalibration(float(np.max(l_m) / np.max(g_c)))


def clear_sky_luminance(g_c, cal: LuminanceCalibration):
    """``alpha * g_c + beta``, clamped below at zero."""
    g = np.asarray(float(g_c) if not isinstance(g_c, np.ndarray) else g_c, dtype=np.float64)
    if np.any(g < 0.0):
        raise DomainError("clear-sky GHI must be non-negative")
    out = np.maximum(cal.alpha * g + cal.beta, 0.0)
    return float(out) if out.ndim == 0 else out
