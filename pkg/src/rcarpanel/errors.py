"""Exception types raised across the package."""


class RcarError(Exception):
    """Base class for all package errors."""


class DomainError(RcarError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ConvergenceError(RcarError, RuntimeError):
    """A series, continued fraction or root search hit its iteration cap."""


class IntegrabilityError(RcarError, RuntimeError):
    """A coefficient law violates the integrability needed for a finite variance."""


class DegenerateSeries(RcarError, ValueError):
    """A series has (numerically) zero variance, so its autocorrelation is undefined."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class MomentDomainError(RcarError, ValueError):
    """Sample moments cannot be the first two moments of a law on (0, 1)."""


class SupportError(RcarError, ValueError):
    """Data fall outside the support required by the null family."""


class EstimationError(RcarError, RuntimeError):
    """An optimizer failed to converge; ``last_iterate`` holds where it stopped."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class ConfigurationError(RcarError, ValueError):
    """Invalid configuration value."""
