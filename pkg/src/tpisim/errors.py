"""Exception hierarchy shared across the package."""


class TpiError(Exception):
    """Base class for all package errors."""


class ValidationError(TpiError, ValueError):
    """A parameter set violates a documented invariant or precondition."""


class UndefinedThresholdError(ValidationError):
    pass


class DegenerateDenominatorError(ValidationError):
    pass


class CapacityError(TpiError):
    """Requested simulation would produce more tags than supported."""


class UnsortedInputError(ValidationError):
    pass


class CounterOverflowError(TpiError, OverflowError):
    pass


class TagFileError(TpiError, ValueError):
    """Base class for time-tag file decoding problems."""


class MalformedHeaderError(TagFileError):
    pass


class TruncatedRecordError(TagFileError):
    pass


class NonMonotonicTimestampError(TagFileError):
    pass
