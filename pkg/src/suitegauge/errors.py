"""Exception types shared across the package."""


class SuiteGaugeError(Exception):
    """Base class for all errors raised by suitegauge."""


class ParseError(SuiteGaugeError):
    """A file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(SuiteGaugeError):
    """Headers, column sets, or shapes do not match the expected schema."""


class IntegrityError(SuiteGaugeError):
    """Duplicate keys or dangling references between tables."""


class DomainError(SuiteGaugeError):
    """A value is outside the domain an operation accepts."""


class ShapeError(SuiteGaugeError):
    """Array dimensions are incompatible."""


class InsufficientDataError(SuiteGaugeError):
    """Too few instances to perform the requested operation."""


class CoverageError(SuiteGaugeError):
    """Performance data does not cover a required (suite, algorithm) pair."""


class ConfigError(SuiteGaugeError):
    """An invalid configuration value."""


class SuiteLookupError(SuiteGaugeError, LookupError):
    """A suite id is not present in the dataset or matrix."""
