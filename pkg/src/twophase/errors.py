"""Exception hierarchy shared by all modules."""


class TwoPhaseError(Exception):
    """Base class for every error raised by this package."""


class TruncationError(TwoPhaseError):
    """Series did not reach its tolerance within ``max_terms``."""


class QuadratureError(TwoPhaseError):
    """Adaptive quadrature exhausted its refinement budget."""


class UnderflowError(TwoPhaseError):
    """Decaying solution left the representable floating point range."""


class SingularSystemError(TwoPhaseError):
    """Interface linear system is numerically singular."""


class HypothesisViolation(TwoPhaseError):
    """Input does not satisfy the preconditions of a check."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class InstabilityError(TwoPhaseError):
    """A time step left the maximum-principle bounds."""


class InsufficientHorizonError(TwoPhaseError):
    """Time series too short for the requested transform."""


class SolverDivergence(TwoPhaseError):
    """Iterative linear solver failed to converge."""


class GeometryError(TwoPhaseError):
    """Invalid or degenerate geometry."""


class CurveOutsideGrid(GeometryError):
    pass


class DegenerateCurve(GeometryError):
    pass


class CircleIntersectsInclusion(GeometryError):
    pass


class NotMonotone(TwoPhaseError):
    """Forward map failed the strict monotonicity scan."""

    def __init__(self, message, roots=()):
        super().__init__(message)
        self.roots = list(roots)


class OutOfRange(TwoPhaseError):
    """Measured datum lies outside the range of the forward map."""


class ConfigError(TwoPhaseError):
    """Experiment configuration failed validation."""
