"""Exception hierarchy shared by every module of the package."""


class CanfisError(Exception):
    """Base class for all errors raised by this package."""


class ParameterDomainError(CanfisError, ValueError):
    """A membership-function parameter or input lies outside its valid domain."""


class ConfigurationError(CanfisError, ValueError):
    """Invalid network, training or experiment configuration."""


class DimensionError(CanfisError, ValueError):
    """Array or vector lengths do not agree."""


class DataError(CanfisError, ValueError):
    """Dataset is empty or contains unusable values."""


class DatasetFileNotFoundError(DataError, FileNotFoundError):
    pass


class MalformedHeaderError(DataError):
    pass


class CellParseError(DataError):
    """A CSV cell could not be parsed as a finite number.

    ``row`` is 1-based and counts data rows (the header is row 0).
    """

    def __init__(self, message, row, column):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyDatasetError(DataError):
    pass


class CorrelationUndefinedError(CanfisError, ValueError):
    """Pearson r (and NMSE) is undefined for a constant series."""

    def __init__(self, message, output=None):
        super().__init__(message)
        self.output = output


class TrainingDivergedError(CanfisError, ArithmeticError):
    """Loss or parameters became non-finite during training."""

    def __init__(self, message, epoch):
        super().__init__(message)
        self.epoch = epoch


class ReportMissingError(CanfisError, FileNotFoundError):
    pass
