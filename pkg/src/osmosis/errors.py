"""Exception types shared across the package."""


class DataError(ValueError):
    """Input data is unusable (non-finite values, bad file contents)."""


class StabilityError(RuntimeError):
    """Requested time step violates the explicit stability bound."""


class ConvergenceError(RuntimeError):
    """Iterative solver failed to reach the requested tolerance.

    Carries the last relative residual and the number of sweeps performed
    so callers can report how far the solve got.
    """

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class NumericalQualityWarning(UserWarning):
    """Computed values degraded beyond the expected round-off level."""
