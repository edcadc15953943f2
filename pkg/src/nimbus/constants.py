"""Named model constants. Every coefficient lives here exactly once."""

import math

# Singapore clear-sky GHI model
SOLAR_CONSTANT = 1366.1  # W/m^2
GHI_SCALE = 0.8277
GHI_COS_EXPONENT = 1.3644
GHI_ELEVATION_DECAY = 0.0013  # per degree of solar elevation

# Eccentricity correction series: constant, cos, sin, cos 2x, sin 2x
E0_COEFFS = (1.00011, 0.034221, 0.001280, 0.000719, 0.000077)

DAYS_PER_YEAR = 365
TWO_PI = 2.0 * math.pi

# Low-precision solar ephemeris (Astronomical Almanac), degrees and days from J2000.0
J2000_EPOCH_S = 946728000.0  # 2000-01-01T12:00:00 UTC
MEAN_LONGITUDE = (280.460, 0.9856474)
MEAN_ANOMALY = (357.528, 0.9856003)
ECLIPTIC_CORRECTION = (1.915, 0.020)
OBLIQUITY = (23.439, -0.0000004)
SIDEREAL_TIME = (280.46061837, 360.98564736629)

# Rec. 709 luma weights
REC709_WEIGHTS = (0.2126, 0.7152, 0.0722)

# Imager and station defaults
NTU_LATITUDE = 1.34
NTU_LONGITUDE = 103.68
SINGAPORE_TZ_OFFSET_MIN = 480
CAPTURE_INTERVAL_MIN = 2
DEFAULT_CROP_SIDE = 2000

# Detection and calibration defaults
CRITICAL_INDEX = 0.08
DAYLIGHT_MAX_ZENITH = 85.0
NIGHT_EPSILON = 1e-6
RAIN_WINDOW_MIN = 15.0
EVENT_MERGE_GAP_MIN = 10.0
ALIGN_TOLERANCE_S = 90.0
GRID_START = 0.01
GRID_END = 0.20
GRID_STEP = 0.01
