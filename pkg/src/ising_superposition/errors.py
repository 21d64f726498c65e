"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An input violates a documented precondition."""


class DegenerateInputError(InvalidArgumentError):
    """The requested route is undefined for these inputs (e.g. delta == 0)."""


class InvalidStateError(ValueError):
    """Amplitudes or observables do not describe a physical state."""


class NumericalInconsistencyError(ArithmeticError):
    """A quantity that must be real (or symmetric) came out otherwise."""


class ConvergenceError(RuntimeError):
    """An iterative scheme did not meet its tolerance before its cap.

    ``iterates`` holds the last two iterates (or the full history) so callers
    can inspect how far from convergence the scheme stopped.
    """

    def __init__(self, message, iterates=()):
        super().__init__(message)
        self.iterates = tuple(iterates)
