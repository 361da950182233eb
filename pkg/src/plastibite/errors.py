"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class ValidationError(ValueError):
    """Model inputs violate one of the standing assumptions.

    ``assumption`` names the violated check ("J1", "J2", "J3" or "params").
    """

    def __init__(self, message, assumption=None):
        super().__init__(message)
        self.assumption = assumption


class NumericalError(RuntimeError):
    """Base class for numerical failures (exit code 2 at the command line)."""


class ConvergenceError(NumericalError):
    """An iteration did not converge; ``residual`` holds the last residual."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class BracketError(NumericalError):
    """A root could not be bracketed in the search range."""


class SteadyStateError(NumericalError):
    """A steady-state construction failed its positivity certificate."""
