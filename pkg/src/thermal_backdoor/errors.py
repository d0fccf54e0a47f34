"""Exception hierarchy shared by all modules."""


class ThermalBackdoorError(Exception):
    """Base class for every error raised by this package."""


# raster IO


class PgmError(ThermalBackdoorError, ValueError):
    """The byte stream is not a valid 8-bit binary PGM."""


class PgmMagicError(PgmError):
    pass


class PgmHeaderError(PgmError):
    """A header field is missing or not a decimal integer."""


class PgmMaxvalError(PgmError):
    pass


class PgmDimensionError(PgmError):
    pass


class PgmTruncatedError(PgmError):
    pass


class PgmTrailingDataError(PgmError):
    pass


# label files


class LabelParseError(ThermalBackdoorError, ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.reason = message


# calibration


class CalibrationError(ThermalBackdoorError, ValueError):
    pass


class DegenerateFitError(CalibrationError):
    pass


class NonMonotoneCalibrationError(CalibrationError):
    pass


class OutOfCalibrationRangeError(CalibrationError):
    pass


class BelowCalibrationRangeError(OutOfCalibrationRangeError):
    pass


class AboveCalibrationRangeError(OutOfCalibrationRangeError):
    pass


class CalibrationCsvError(CalibrationError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


# triggers and poisoning


class TriggerError(ThermalBackdoorError, ValueError):
    pass


class MissingThermalMapError(TriggerError):
    pass


class DegenerateBoxError(TriggerError):
    pass


class TriggerPlacementError(TriggerError):
    pass


class PlanError(ThermalBackdoorError, ValueError):
    pass


class ConfigError(ThermalBackdoorError, ValueError):
    pass


class ConfigContradictionError(ConfigError):
    """Parameters that are individually valid but inconsistent with each other."""


class DatasetError(ThermalBackdoorError):
    pass
