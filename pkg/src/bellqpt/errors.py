"""Exception types shared across the package."""


class BellQPTError(Exception):
    """Base class for errors raised by this package."""


class DomainError(BellQPTError, ValueError):
    """A parameter lies outside the domain where a quantity is defined."""


class SizeError(BellQPTError, ValueError):
    """A dense construction was requested for a system that is too large."""


class ConvergenceError(BellQPTError, RuntimeError):
    """The eigensolver failed or produced an eigenpair that fails verification.

    ``index`` is the position of the first offending eigenpair in ascending
    order, or ``None`` when the backend does not report it.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index
