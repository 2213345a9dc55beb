"""Exception hierarchy for the cojumps package."""


class CojumpError(Exception):
    """Base class for every error raised by this package."""


class DenominatorZero(CojumpError, ZeroDivisionError):
    """A ratio statistic has a zero denominator, so the test is inapplicable."""


class InsufficientData(CojumpError, ValueError):
    """Too few increments for the requested estimator or window."""


class IndexOutOfWindow(CojumpError, IndexError):
    """Local windows around the requested index do not fit in the series."""


class InsufficientDraws(CojumpError, ValueError):
    """Too few resampled copies to form the requested quantile."""


class MissingPowerGuard(CojumpError, ValueError):
    """A truncated cutoff was requested without ``power_guard`` settings."""


class DegenerateConfig(CojumpError, ValueError):
    """Scenario parameters allow a jump that would make a level non-positive."""


class ConfigError(CojumpError, ValueError):
    """Invalid experiment or CLI configuration."""


class ParseError(CojumpError, ValueError):
    """Malformed row in an input CSV file."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class GapError(CojumpError, ValueError):
    """Observation times are not regularly spaced within tolerance."""
