"""Exception types shared across the package."""

from __future__ import annotations


class WorksplitError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(WorksplitError, ValueError):
    """A domain object or argument violates its invariants."""


class NumericalError(WorksplitError, ArithmeticError):
    """A numerical procedure produced an unusable result."""


class QuadratureError(NumericalError):
    """Adaptive quadrature could not certify the requested tolerance.

    Carries the best available estimate and its error bound so callers can
    decide whether the partial result is still usable.
    """

    def __init__(self, message: str, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class MomentInfeasibleError(NumericalError):
    """No Beta distribution has the requested (mean, variance) pair."""

    def __init__(self, mean: float, variance: float):
        super().__init__(
            f"no Beta distribution has mean={mean!r} and variance={variance!r}: "
            f"variance must lie strictly below mean*(1-mean)={mean * (1.0 - mean)!r}"
        )
        self.mean = mean
        self.variance = variance


class InfeasibleBudgetError(WorksplitError):
    """No sweep point satisfies the requested QoS budget."""

    def __init__(self, message: str, best_achievable: float):
        super().__init__(message)
        self.best_achievable = best_achievable


class TraceFormatError(WorksplitError, ValueError):
    """A trace file failed to parse or a record violates its invariants."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
