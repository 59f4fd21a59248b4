"""Exception types shared across the package.

The CLI maps these onto exit codes: usage/config problems exit 1, data and
validation problems exit 2, numeric failures exit 3.
"""


class MelostyleError(Exception):
    """Base class for all package-specific errors."""


class FormatError(MelostyleError):
    """A file is structurally malformed (bad header, bad row, wrong grid)."""


class UnsupportedFormatError(FormatError):
    """A resource uses an encoding this package refuses to guess about."""


class ValidationError(MelostyleError):
    """Well-formed input violates a documented invariant."""


class AlignmentError(MelostyleError):
    """Two frame-indexed resources do not cover the same time span."""


class UndefinedFeatureError(MelostyleError):
    """A feature has no defined value for this input (e.g. no voiced frames)."""


class MissingDataError(MelostyleError):
    """A required record is absent."""


class DataAnomalyError(MelostyleError):
    """Data contradicts an assumption the method depends on."""


class NumericError(MelostyleError):
    """A numeric procedure failed (singular covariance, undefined statistic)."""


class ConfigError(MelostyleError):
    """A run configuration is inconsistent or names unknown keys."""
