"""Exception taxonomy shared across the package."""


class RegimeRnnError(Exception):
    """Base class for all package errors."""


class ConfigurationError(RegimeRnnError):
    """Invalid dimensions, ranges, file schemas, or run configuration."""


class NumericError(RegimeRnnError):
    """Non-finite inputs or numerically unusable matrices."""


class StateError(RegimeRnnError):
    """Runtime state violates an invariant (e.g. unnormalized belief)."""


class DivergenceError(RegimeRnnError):
    """Training produced a non-finite loss."""
