"""Exception hierarchy shared by all modules."""


class TransbendError(ValueError):
    """Base class for every error raised by the package."""


class InvalidSpecError(TransbendError):
    """A curve specification or run configuration is malformed."""


class SingularCurveError(TransbendError):
    """A curve has a vanishing tangent where a regular curve is required."""


class DegenerateSurfaceError(TransbendError):
    """Path and profile tangents are parallel somewhere on the grid."""

    def __init__(self, message, u=None, v=None):
        super().__init__(message)
        self.u = u
        self.v = v


class HypothesisError(TransbendError):
    """Input geometry violates the hypothesis of a construction."""


class BasisConstructionError(TransbendError):
    """A cone mirror basis failed its own verification."""


class InconsistentVelocityError(TransbendError):
    """A velocity field is not an infinitesimal rotation of the tangent frame."""


class ParameterRangeError(TransbendError):
    """A bending parameter lies outside the admissible interval."""


class GridMismatchError(TransbendError):
    """Two objects that must share a grid and pieces do not."""
