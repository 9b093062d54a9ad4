class SftError(Exception):
    """Base class for errors raised by this package."""


class InvalidModelError(SftError, ValueError):
    """Malformed input: bad matrix, unknown labels, missing potential values."""


class PreconditionError(SftError):
    """Well-formed input that violates a mathematical precondition."""


class ConvergenceError(SftError, RuntimeError):
    """An iteration did not reach its tolerance within the step budget."""
