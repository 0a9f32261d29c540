"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the domain of an operation (bad ids, shapes, kinds)."""


class SingularityError(ArithmeticError):
    """A log, transport or p-power is undefined for the given configuration."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
