"""Exception types shared across the package."""


class DynfeatError(Exception):
    """Base class for all package errors."""


class FormatError(DynfeatError):
    """A dataset file is missing, malformed, or violates the format contract."""


class ArgumentError(DynfeatError):
    """An argument violates an operation's precondition."""


class ConvergenceError(DynfeatError):
    """An iterative solver failed to reach its tolerance.

    Carries the last residual so callers can decide whether to fall back.
    """

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class CapacityError(DynfeatError):
    """A computation was refused because the input exceeds a size guard."""


class GenerationError(DynfeatError):
    """A random generator exhausted its retry budget."""


class DegenerateError(DynfeatError):
    """Training data is degenerate (e.g. a single class)."""
