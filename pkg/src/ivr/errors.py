"""Exception types raised across the package."""


class IvrError(Exception):
    """Base class for all package errors."""


class InvalidArgument(IvrError, ValueError):
    pass


class OutOfRange(IvrError, ValueError):
    pass


class AliasingError(IvrError):
    """Instantaneous baseband frequency exceeds the Nyquist limit."""


class DetectionFailure(IvrError):
    """No spectral peak rises above the noise floor."""


class NonInvertibleProjection(IvrError, ValueError):
    pass


class UndefinedHeading(IvrError, ValueError):
    pass


class UndefinedAttackAngle(IvrError, ValueError):
    pass


class DegenerateEnvelope(IvrError, ValueError):
    pass


class NumericError(IvrError):
    pass


class ConfigError(IvrError, ValueError):
    """Malformed or unknown configuration content."""
