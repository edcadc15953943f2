"""Solar geometry and the Singapore clear-sky global horizontal irradiance model."""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from nimbus import constants as C
from nimbus.errors import DomainError


@dataclass(frozen=True)
class GeoLocation:
    latitude: float
    longitude: float

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise DomainError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise DomainError(f"longitude {self.longitude} outside [-180, 180]")


NTU = GeoLocation(C.NTU_LATITUDE, C.NTU_LONGITUDE)


@dataclass(frozen=True)
class SolarContext:
    """Solar quantities for one place and instant.

    ``day_angle`` is built from ``day_number`` with the fixed 365-day year, so
    day 366 maps to exactly 2*pi.
    """

    location: GeoLocation
    timestamp: datetime
    day_number: int
    day_angle: float
    eccentricity: float
    zenith_angle: float


@dataclass(frozen=True)
class Irradiance:
    value: float  # W/m^2

    def __post_init__(self):
        if not self.value >= 0.0:
            raise DomainError(f"irradiance must be non-negative, got {self.value}")

    def __float__(self):
        return self.value


def day_angle(day_number: int) -> float:
    """Day angle in radians, ``2*pi*(d - 1)/365``."""
    if isinstance(day_number, bool) or int(day_number) != day_number:
        raise DomainError(f"day number must be an integer, got {day_number!r}")
    if not 1 <= day_number <= 366:
        raise DomainError(f"day number {day_number} outside [1, 366]")
    return C.TWO_PI * (int(day_number) - 1) / C.DAYS_PER_YEAR


def eccentricity_correction(gamma):
    """Earth-sun distance correction factor for day angle ``gamma`` (radians).

    Accepts scalars or arrays.
    """
    a0, a1, b1, a2, b2 = C.E0_COEFFS
    g = np.asarray(gamma, dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise DomainError("day angle must be finite")
    out = a0 + a1 * np.cos(g) + b1 * np.sin(g) + a2 * np.cos(2 * g) + b2 * np.sin(2 * g)
    return float(out) if out.ndim == 0 else out


def _as_utc(t: datetime) -> datetime:
    if t.tzinfo is None:
        raise DomainError(f"timestamp {t.isoformat()} has no UTC offset")
    return t.astimezone(timezone.utc)


def _epoch_seconds(times) -> np.ndarray:
    if isinstance(times, datetime):
        return np.array([_as_utc(times).timestamp()])
    arr = np.asarray(times)
    if arr.dtype == object:
        return np.array([_as_utc(t).timestamp() for t in arr.ravel()], dtype=np.float64)
    return arr.astype(np.float64).ravel()


def zenith_from_epoch(epoch_s, latitude: float, longitude: float) -> np.ndarray:
    """Geometric solar zenith angle (degrees) for UTC epoch seconds.

    Low-precision almanac ephemeris: the sun's ecliptic longitude from mean
    longitude and anomaly, converted to right ascension and declination, then
    local hour angle from Greenwich mean sidereal time. Good to about 0.01
    degree between 1950 and 2050; no refraction.
    """
    n = (np.asarray(epoch_s, dtype=np.float64) - C.J2000_EPOCH_S) / 86400.0
    mean_lon = np.mod(C.MEAN_LONGITUDE[0] + C.MEAN_LONGITUDE[1] * n, 360.0)
    anomaly = np.deg2rad(np.mod(C.MEAN_ANOMALY[0] + C.MEAN_ANOMALY[1] * n, 360.0))
    ecl_lon = np.deg2rad(mean_lon + C.ECLIPTIC_CORRECTION[0] * np.sin(anomaly)
                         + C.ECLIPTIC_CORRECTION[1] * np.sin(2 * anomaly))
    obliq = np.deg2rad(C.OBLIQUITY[0] + C.OBLIQUITY[1] * n)

    ra = np.arctan2(np.cos(obliq) * np.sin(ecl_lon), np.cos(ecl_lon))
    decl = np.arcsin(np.sin(obliq) * np.sin(ecl_lon))
    gmst = np.mod(C.SIDEREAL_TIME[0] + C.SIDEREAL_TIME[1] * n, 360.0)
    hour_angle = np.deg2rad(gmst + longitude) - ra

    phi = math.radians(latitude)
    cosz = math.sin(phi) * np.sin(decl) + math.cos(phi) * np.cos(decl) * np.cos(hour_angle)
    return np.rad2deg(np.arccos(np.clip(cosz, -1.0, 1.0)))


def solar_zenith_angle(loc: GeoLocation, t):
    """Solar zenith angle in degrees at ``loc`` for a timezone-aware instant.

    ``t`` may also be a sequence of datetimes, in which case an array is
    returned.
    """
    z = zenith_from_epoch(_epoch_seconds(t), loc.latitude, loc.longitude)
    return float(z[0]) if isinstance(t, datetime) else z


def clear_sky_ghi(zenith, e0=1.0):
    """Clear-sky GHI in W/m^2 for zenith angle(s) in degrees.

    Zero once the sun reaches the horizon. Returns an :class:`Irradiance` for
    scalar input and a float array otherwise.
    """
    z = np.asarray(zenith, dtype=np.float64)
    if np.any(~np.isfinite(z)) or np.any((z < 0.0) | (z > 180.0)):
        raise DomainError("zenith angle must lie in [0, 180] degrees")
    e = np.asarray(e0, dtype=np.float64)
    if np.any(~((e >= 0.9) & (e <= 1.1))):
        raise DomainError(f"eccentricity correction {e0} outside [0.9, 1.1]")
    up = z < 90.0
    cosz = np.where(up, np.cos(np.deg2rad(z)), 0.0)
    g = np.where(
        up,
        C.GHI_SCALE * e * C.SOLAR_CONSTANT * cosz ** C.GHI_COS_EXPONENT
        * np.exp(-C.GHI_ELEVATION_DECAY * (90.0 - z)),
        0.0,
    )
    if g.ndim == 0:
        return Irradiance(float(g))
    return g


def day_number(t: datetime) -> int:
    return _as_utc(t).timetuple().tm_yday


def solar_context(loc: GeoLocation, t: datetime) -> SolarContext:
    dn = day_number(t)
    gamma = day_angle(dn)
    return SolarContext(
        location=loc,
        timestamp=_as_utc(t),
        day_number=dn,
        day_angle=gamma,
        eccentricity=eccentricity_correction(gamma),
        zenith_angle=solar_zenith_angle(loc, t),
    )


def ghi_series(loc: GeoLocation, epoch_s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Zenith, eccentricity factor and clear-sky GHI for UTC epoch seconds."""
    epoch_s = np.asarray(epoch_s, dtype=np.float64)
    zen = zenith_from_epoch(epoch_s, loc.latitude, loc.longitude)
    dates = np.floor(epoch_s / 86400.0).astype("int64").astype("datetime64[D]")
    doy = (dates - dates.astype("datetime64[Y]").astype("datetime64[D]")).astype(np.int64) + 1
    e0 = eccentricity_correction(C.TWO_PI * (doy - 1) / C.DAYS_PER_YEAR)
    e0 = np.atleast_1d(e0)
    return zen, e0, np.atleast_1d(clear_sky_ghi(zen, e0))
