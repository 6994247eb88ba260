"""Exception hierarchy shared by all wiresec modules."""


class WiresecError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(WiresecError):
    """A noise spectral density or covariance matrix is not positive definite."""


class BlockTooShort(WiresecError):
    """The DFT block length does not exceed twice the channel memory."""


class DimensionMismatch(WiresecError):
    """Channel components have incompatible matrix dimensions."""


class SingularNoise(WiresecError):
    """A noise covariance factorization failed (singular or indefinite)."""


class PeriodTooShort(WiresecError):
    """A periodic channel description has a non-positive or unusable period."""


class NoPositiveRegion(WiresecError):
    """The receiver SNR density nowhere exceeds the eavesdropper's."""


class ParseError(WiresecError):
    """A description file is syntactically invalid or missing fields."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class ValidationError(WiresecError):
    """A description file violates a model invariant."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"field {field!r}: {message}")


class IoError(WiresecError):
    """An output file could not be written."""
