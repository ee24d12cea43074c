"""Exception types raised across the package."""


class MPMABError(Exception):
    pass


class ValidationError(MPMABError, ValueError):
    """A configuration value is invalid. ``field`` is a dotted path when known."""

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class ParseError(ValidationError):
    pass


class ParameterViolation(ValidationError):
    pass


class NonUniqueOptimalMatching(ValidationError):
    pass


class AttackProbabilityOne(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass


class DuplicateSend(MPMABError):
    pass


class IncompleteRound(MPMABError):
    pass


class InstanceTooLarge(MPMABError, ValueError):
    pass


class NoConvergence(MPMABError, RuntimeError):
    pass


class ZeroTransition(MPMABError, ValueError):
    pass


class ExplorationStalled(MPMABError, RuntimeError):
    pass
