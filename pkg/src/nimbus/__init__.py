"""Rainfall onset detection from whole-sky imager luminance."""

from nimbus.calibration import (
    EmpiricalCDF,
    LabeledSample,
    OcPoint,
    RainEvent,
    build_events,
    empirical_cdf,
    label_samples,
    oc_curve,
    select_elbow,
    threshold_grid,
)
from nimbus.errors import (
    CalibrationError,
    ConfigError,
    DimensionError,
    DomainError,
    IngestionError,
    InputError,
    NightError,
    NimbusError,
)
from nimbus.index import (
    DetectionConfig,
    IndexSample,
    clearness_index,
    detect_onset,
    minutes_to_nearest_event,
)
from nimbus.luminance import (
    LuminanceCalibration,
    LuminanceSample,
    SkyImage,
    clear_sky_luminance,
    crop_center,
    fit_calibration,
    mean_luminance,
)
from nimbus.solar import (
    GeoLocation,
    Irradiance,
    SolarContext,
    clear_sky_ghi,
    day_angle,
    eccentricity_correction,
    solar_context,
    solar_zenith_angle,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "ConfigError",
    "DetectionConfig",
    "DimensionError",
    "DomainError",
    "EmpiricalCDF",
    "GeoLocation",
    "IndexSample",
    "IngestionError",
    "InputError",
    "Irradiance",
    "LabeledSample",
    "LuminanceCalibration",
    "LuminanceSample",
    "NightError",
    "NimbusError",
    "OcPoint",
    "RainEvent",
    "SkyImage",
    "SolarContext",
    "build_events",
    "clear_sky_ghi",
    "clear_sky_luminance",
    "clearness_index",
    "crop_center",
    "day_angle",
    "detect_onset",
    "eccentricity_correction",
    "empirical_cdf",
    "fit_calibration",
    "label_samples",
    "mean_luminance",
    "minutes_to_nearest_event",
    "oc_curve",
    "select_elbow",
    "solar_context",
    "solar_zenith_angle",
    "threshold_grid",
]
