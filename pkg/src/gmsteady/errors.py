"""Exception hierarchy shared by all gmsteady modules."""


class GMError(Exception):
    """Base class for every error raised by gmsteady."""


class ConfigurationError(GMError, ValueError):
    """Invalid grid, exponent, or run configuration."""


class DomainError(GMError, ValueError):
    """A value outside the domain of an operation (zero field, negative base, NaN)."""


class CalibrationError(GMError):
    """A barrier constant could not be calibrated within its search range."""


class SolverError(GMError):
    """A linear solve did not reach its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class EigensolverError(SolverError):
    """Inverse power iteration did not converge."""

    def __init__(self, message, rayleigh=None, iterations=None):
        super().__init__(message, residual=None, iterations=iterations)
        self.rayleigh = rayleigh
