"""Exception classes raised by the response engine."""


class ResponseError(ValueError):
    """Base class for all physics/configuration errors in this package."""


class InvalidFrequencyError(ResponseError):
    pass


class DegenerateDriveError(ResponseError):
    pass


class ResonanceError(ResponseError):
    """The closed-loop condition w_c = w_1 - w_2 is violated."""

    def __init__(self, residual):
        self.residual = residual
        super().__init__(f"closed-loop resonance violated, residual {residual!r} rad/s")


class DetuningConstraintError(ResponseError):
    pass


class SingularResponseError(ResponseError):
    pass


class ConfigurationError(ResponseError):
    pass


class TruncationError(ResponseError):
    pass


class LocalFieldSingularityError(ResponseError):
    """Polarization catastrophe: the local-field denominator vanishes.

    ``indices`` lists the flat positions (for array input) at which the
    denominator fell below the threshold.
    """

    def __init__(self, message, indices=()):
        self.indices = tuple(int(i) for i in indices)
        super().__init__(message)


class DegenerateMediumError(ResponseError):
    pass


class InvalidResolutionError(ResponseError):
    pass


class IllConditionedError(ResponseError):
    def __init__(self, condition):
        self.condition = condition
        super().__init__(f"Liouvillian condition estimate {condition:.3e} exceeds limit")


class ReferenceZeroError(ResponseError):
    pass


class FieldAmplitudeError(ResponseError):
    pass


class SingularPermeabilityError(ResponseError):
    pass


class SingularCorrectionError(ResponseError):
    pass
