"""Exception and warning types."""


class MQSenseError(Exception):
    """Base class for package errors."""


class SizeError(MQSenseError, ValueError):
    pass


class LabelError(MQSenseError, ValueError):
    pass


class BasisMismatchError(MQSenseError, ValueError):
    pass


class ParameterError(MQSenseError, ValueError):
    pass


class SpecError(MQSenseError, ValueError):
    pass


class GridError(MQSenseError, ValueError):
    pass


class ResolutionError(MQSenseError, ValueError):
    pass


class RangeError(MQSenseError, ValueError):
    pass


class FitError(MQSenseError, RuntimeError):
    pass


class InputError(MQSenseError, ValueError):
    pass


class NoSensitivityError(MQSenseError, ValueError):
    """Fitted distortion slope is not positive, so no threshold exists."""


class ConfigError(MQSenseError, ValueError):
    pass


class AccuracyWarning(UserWarning):
    """Integrator could not meet the requested accuracy."""


class ConditioningWarning(UserWarning):
    """Pseudo-inverse solve discarded a non-negligible part of the right-hand side."""
