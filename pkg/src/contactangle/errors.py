"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Base class for failures of the pointwise geometric pipeline."""


class NonFinite(GeometryError):
    pass


class DegenerateMetric(GeometryError):
    pass


class BetaDegenerate(GeometryError):
    """sin(beta) vanishes: the fifth normal is undefined."""


class AlphaDegenerate(GeometryError):
    """sin(alpha) vanishes: the third and fourth normals are undefined."""


class NotMinimal(GeometryError):
    pass


class InvalidRadii(ValueError):
    pass


class DegenerateExponents(ValueError):
    pass


class InfeasibleConstraint(ValueError):
    pass


class NoConvergence(RuntimeError):
    """Raised by the torus solver; carries the best result found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
