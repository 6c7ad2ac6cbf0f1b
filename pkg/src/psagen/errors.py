"""Exception hierarchy shared across the package."""


class PsagenError(Exception):
    """Base class for all package errors."""


class ValidationError(PsagenError):
    """Invalid input data (non-Hermitian matrix, bad probabilities, ...)."""


class ConfigurationError(PsagenError):
    """Inconsistent wiring between components (e.g. a gap without an Omega entry)."""


class QuadratureError(PsagenError):
    """Numerical integration failed to converge.

    Attributes
    ----------
    residual : float or None
        Estimate of the remaining absolute error, when available.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotCompletelyPositiveError(PsagenError):
    """A rate matrix has a negative eigenvalue beyond tolerance.

    Carries the offending minimum eigenvalue as ``lambda_min``.
    """

    def __init__(self, message, lambda_min):
        super().__init__(message)
        self.lambda_min = lambda_min


class NonUniqueSteadyStateError(PsagenError):
    """The generator kernel is degenerate; carries ``kernel_dim``."""

    def __init__(self, message, kernel_dim):
        super().__init__(message)
        self.kernel_dim = kernel_dim


class IntegrationError(PsagenError):
    """Time propagation failed; carries the time stamp ``t``."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t
