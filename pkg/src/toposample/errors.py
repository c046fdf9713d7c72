"""Exception types shared across the package."""


class ToposampleError(Exception):
    """Base class for package-specific failures."""


class NondegeneracyError(ToposampleError):
    """The derivative covariance matrix is singular or indefinite at a point.

    Raised when the joint distribution of (u, u', u'') degenerates, which
    makes the sampling density undefined there.
    """

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class FactorizationError(ToposampleError):
    """A coefficient covariance matrix is not positive semidefinite."""


class NotPositiveDefiniteError(ToposampleError):
    """A local covariance matrix has a nonpositive eigenvalue."""


class NonFiniteDensityError(ToposampleError):
    """A density evaluation produced NaN or infinity."""


class DegenerateDensityError(ToposampleError):
    """The density integrates to zero, so no guided grid can be placed."""


class ConfigError(ToposampleError):
    """A run configuration is missing, malformed, or inconsistent."""
