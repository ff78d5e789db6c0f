"""Exception hierarchy shared by all modules."""


class ChemoBlowupError(Exception):
    """Base class for package errors."""


class InvalidParameterError(ChemoBlowupError, ValueError):
    """A parameter or input violates its documented bounds."""


class DomainError(ChemoBlowupError, ValueError):
    """A point lies outside the domain where the quantity is defined."""


class PreconditionError(ChemoBlowupError, ValueError):
    """An operation was called on inputs its contract excludes."""


class InfeasibleError(ChemoBlowupError):
    """The requested construction does not exist for these parameters."""


class NotRepresentableError(ChemoBlowupError):
    """Values overflow double precision; use toy overrides instead."""


class AbortedRunError(ChemoBlowupError, RuntimeError):
    """A simulation produced non-finite values.

    The last finite state is kept on ``last_state`` and the partial result on
    ``partial``.
    """

    def __init__(self, message, last_state=None, partial=None):
        super().__init__(message)
        self.last_state = last_state
        self.partial = partial
