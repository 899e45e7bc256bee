"""Exception hierarchy for the whitham package."""


class WhithamError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(WhithamError, ValueError):
    """Input outside the domain of an operation (non-finite, non-positive, ...)."""


class ShapeError(WhithamError, ValueError):
    """Array lengths or grids are inconsistent."""


class SingularityError(WhithamError, ArithmeticError):
    """Evaluation at a singular point, or a numerically singular linear system."""


class AccuracyError(WhithamError, ArithmeticError):
    """A quadrature could not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class DivergenceError(WhithamError, RuntimeError):
    """Newton iteration did not converge; ``last_iterate`` holds the final state."""

    def __init__(self, message, last_iterate=None, history=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.history = history or []


class ContinuationStallError(WhithamError, RuntimeError):
    """Continuation step size fell below the floor."""

    def __init__(self, message, last_lambda=None, branch=None):
        super().__init__(message)
        self.last_lambda = last_lambda
        self.branch = branch


class NonConvergenceError(WhithamError, RuntimeError):
    """A period sweep ran out of periods before the profiles settled."""

    def __init__(self, message, sweep=None):
        super().__init__(message)
        self.sweep = sweep


class ConstructionError(WhithamError, RuntimeError):
    """A constructed solitary wave violates one of its defining bounds."""

    def __init__(self, message, failed=None):
        super().__init__(message)
        self.failed = failed


class ResolutionError(WhithamError, ValueError):
    """Samples do not span enough scales for a requested fit."""


class FormatError(WhithamError, ValueError):
    """A wave/report document does not match the expected schema."""
