"""Glue from raw inputs to an index series, shared by the CLI subcommands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nimbus import constants as C
from nimbus.index import clearness_index_series
from nimbus.luminance import (
    LuminanceCalibration,
    SkyImage,
    clear_sky_luminance,
    crop_center,
    crop_side_for,
    fallback_calibration,
    mean_luminance,
)
from nimbus.solar import GeoLocation, ghi_series


def measure_images(refs, crop_side=None, crop_fraction=None, weights=C.REC709_WEIGHTS):
    """Mean cropped luminance for each image reference, in input order."""
    out = np.empty(len(refs), dtype=np.float64)
    for k, ref in enumerate(refs):
        img = SkyImage.from_file(ref.path, ref.timestamp)
        side = crop_side_for(img, crop_side, crop_fraction)
        out[k] = mean_luminance(crop_center(img, side), weights)
    return out


@dataclass
class IndexTable:
    epoch_s: np.ndarray
    l_m: np.ndarray
    zenith: np.ndarray
    g_c: np.ndarray
    l_c: np.ndarray
    index: np.ndarray
    calibration: LuminanceCalibration

    def select(self, mask) -> "IndexTable":
        return IndexTable(self.epoch_s[mask], self.l_m[mask], self.zenith[mask], self.g_c[mask],
                          self.l_c[mask], self.index[mask], self.calibration)

    def __len__(self):
        return self.epoch_s.size


def build_index_table(epoch_s, l_m, location: GeoLocation,
                      calibration: LuminanceCalibration | None = None,
                      daylight_max_zenith: float = C.DAYLIGHT_MAX_ZENITH) -> IndexTable:
    """Index series restricted to daylight samples with a defined clear-sky luminance."""
    epoch_s = np.asarray(epoch_s, dtype=np.float64)
    l_m = np.asarray(l_m, dtype=np.float64)
    zen, _, g_c = ghi_series(location, epoch_s)
    day = zen < daylight_max_zenith
    if calibration is None:
        calibration = fallback_calibration(l_m[day], g_c[day])
    l_c = clear_sky_luminance(g_c, calibration)
    idx = clearness_index_series(l_m, l_c)
    table = IndexTable(epoch_s, l_m, zen, g_c, l_c, idx, calibration)
    return table.select(day & np.isfinite(idx))
