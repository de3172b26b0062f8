"""Exception hierarchy shared by the solvers and the CLI."""


class GameError(ValueError):
    """Base class for every error raised by this package."""


class ParameterError(GameError):
    """Malformed parameter document (missing, unknown or non-numeric fields)."""


class SignViolation(ParameterError):
    def __init__(self, field: str, value: float, rule: str):
        self.field = field
        self.value = value
        super().__init__(f"{field}={value!r} violates {rule}")


class ZeroCoefficient(ParameterError):
    def __init__(self, field: str):
        self.field = field
        super().__init__(f"{field} must be nonzero")


class ScheduleError(GameError):
    """Impulse instants that are unordered, duplicated or outside [0, T]."""


class NonFiniteState(GameError):
    pass


class GridTooCoarse(GameError):
    pass


class BoundaryDegenerate(GameError):
    """Parameters put an equilibrium impulse on (or numerically at) 0 or T."""


class InconsistentClassification(GameError):
    """The inequality systems and the direct root test disagree."""
