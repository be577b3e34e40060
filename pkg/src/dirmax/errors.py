"""Exception types shared across the package."""


class DirmaxError(Exception):
    """Base class for package errors."""


class InvalidArgument(DirmaxError, ValueError):
    """An argument violates an operation's preconditions."""


class ValidationFailure(DirmaxError):
    """A constructed object fails its structural invariants.

    The message names the offending stage / interval where applicable.
    """


class PreconditionViolation(DirmaxError):
    """A documented precondition of an operation does not hold."""


class TruncationError(DirmaxError):
    """A sampled kernel loses too much mass outside the grid.

    Carries the estimated lost mass fraction in ``lost_fraction``.
    """

    def __init__(self, message: str, lost_fraction: float):
        super().__init__(message)
        self.lost_fraction = lost_fraction
