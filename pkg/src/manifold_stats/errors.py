"""Exception types shared across the package."""


class InvalidPointError(ValueError):
    """Coordinates violate the point invariants of their manifold."""


class CutLocusError(ValueError):
    """Log-map requested at (or numerically within 1e-12 of) the cut locus."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge within the subdivision budget.

    Carries the best available estimate and its error bound so callers can
    decide whether the partial answer is still usable.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class ApproximationRangeError(ValueError):
    """Curvature correction exceeds the validity range of the expansion
    (concentration too weak: 1 - tr(RC)/6 <= 0)."""


class UnsupportedCombinationError(ValueError):
    """Manifold/tensor/profile combination outside the supported set,
    e.g. anisotropic concentration on hyperbolic space."""
