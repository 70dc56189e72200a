"""Exception types shared across the package."""


class ManvbError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(ManvbError, ValueError):
    """Array shapes are inconsistent with the requested operation."""


class GeometryError(ManvbError, ValueError):
    """Manifold kinds or base points do not match."""


class DegenerateRetractionError(ManvbError):
    """B + U lost column rank, so the polar factor is not well defined."""


class IllConditionedCovarianceError(ManvbError):
    """The low-rank plus diagonal covariance could not be factorized."""


class NumericalError(ManvbError):
    """A non-finite value appeared where a finite one is required."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class DivergenceError(ManvbError):
    """The optimizer produced non-finite objective values for too long.

    Carries the last parameter value that still evaluated to a finite
    objective, so callers can checkpoint or inspect it.
    """

    def __init__(self, message, last_good=None, iteration=None):
        super().__init__(message)
        self.last_good = last_good
        self.iteration = iteration
