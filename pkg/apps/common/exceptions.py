"""
Exception hierarchy shared by every app.

Each class carries the process exit code the pipeline commands report:
2 for configuration errors, 3 for numerical errors, 4 for infeasibility.
"""

from typing import Optional


class ProtoshapeError(Exception):
    """Base class for all domain errors."""
    exit_code = 1


class ConfigurationError(ProtoshapeError):
    """Malformed configuration or invalid design specification."""
    exit_code = 2

    def __init__(self, message: str, field_path: Optional[str] = None):
        self.field_path = field_path
        if field_path:
            message = f"{field_path}: {message}"
        super().__init__(message)


class InvalidBasematrixError(ConfigurationError, ValueError):
    """Basematrix violates its structural invariants."""


class NumericalError(ProtoshapeError):
    """A numerical routine failed or produced an unusable value."""
    exit_code = 3

    def __init__(self, message: str, iteration: Optional[int] = None):
        self.iteration = iteration
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)


class NumericalToleranceError(NumericalError):
    """Quadrature or optimizer did not reach the requested tolerance."""


class DegenerateLevelError(NumericalError):
    """A bit value has zero probability, so its prior term is undefined."""


class DomainError(NumericalError, ValueError):
    """Argument outside the domain of a function."""


class BracketError(NumericalError):
    """SNR bracket does not straddle the decoding threshold."""


class InfeasibilityError(ProtoshapeError):
    """No candidate satisfies the structural constraints."""
    exit_code = 4
