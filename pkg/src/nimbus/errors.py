"""Exception types. Each carries the module it came from and a CLI exit code."""


class NimbusError(Exception):
    module = "nimbus"
    exit_code = 3


class DomainError(NimbusError, ValueError):
    """Argument outside the domain of a numeric operation."""


class DimensionError(DomainError):
    pass


class NightError(DomainError):
    """Clear-sky luminance too small for a meaningful index."""

    module = "index"


class InputError(NimbusError, ValueError):
    """Malformed or unsorted input series."""


class IngestionError(NimbusError):
    module = "ingest"


class CalibrationError(NimbusError):
    module = "calibration"
    exit_code = 4


class ConfigError(NimbusError, ValueError):
    module = "cli"
    exit_code = 2
