"""Exception types shared across the package."""


class NeckflowError(Exception):
    """Base class for all package-specific errors."""


class InvalidShapeError(NeckflowError, ValueError):
    """Shape parameter outside the single-loop regime (lambda >= 1 or bad b)."""


class ConstructionError(NeckflowError, ValueError):
    """Profile construction produced non-finite or non-positive radii."""


class SingularCurveError(NeckflowError, ValueError):
    """Operation requires a regular curve but some radius is <= 0."""


class NumericalFailureError(NeckflowError, RuntimeError):
    """Time stepping produced non-finite values."""


class StepCollapseError(NeckflowError, RuntimeError):
    """Adaptive time step fell below the configured dt_min."""


class SolverFailureError(NeckflowError, RuntimeError):
    """ODE solve did not reach the requested tolerance."""


class FitError(NeckflowError, ValueError):
    """Not enough (or invalid) data for a requested fit."""


class BracketError(NeckflowError, ValueError):
    """Bisection endpoints do not bracket the sub/supercritical transition."""


class MonotonicityError(NeckflowError, RuntimeError):
    """Observed classifications violate monotonicity in the shape parameter."""

    def __init__(self, msg, lambdas=()):
        super().__init__(msg)
        self.lambdas = tuple(lambdas)


class InsufficientOverlapError(NeckflowError, ValueError):
    """Curves do not cover the requested comparison window."""
