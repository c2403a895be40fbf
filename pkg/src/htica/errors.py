"""Exception hierarchy shared by all htica modules."""

from __future__ import annotations


class HticaError(Exception):
    """Base class for errors raised by htica."""


class InvalidParameterError(HticaError, ValueError):
    """A scalar parameter is outside its admissible range."""


class InvalidInputError(HticaError, ValueError):
    """An array argument has the wrong shape or violates a precondition."""


class InsufficientSamplesError(InvalidInputError):
    """Too few rows to perform the requested operation."""


class DegenerateMatrixError(HticaError):
    """A random matrix could not be made nonsingular."""


class SolverFailure(HticaError):
    """An LP solve did not reach optimality.

    Attributes
    ----------
    iterations : int
        Number of iterations performed before giving up.
    """

    def __init__(self, message: str, iterations: int = 0):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


class DegenerateSampleSpanError(HticaError):
    """A sample row lies outside the span of the sample (infinite gauge)."""


class SingularScatterError(HticaError, ValueError):
    """A scatter matrix is numerically singular."""


class UndampableSampleError(HticaError):
    """No damping radius in the search bracket reaches the target rate."""


class EmptyOutputError(HticaError):
    """Rejection sampling accepted no rows."""


class UnconvergedResultError(HticaError):
    """Every FastICA restart ended without convergence.

    Attributes
    ----------
    estimate : IcaEstimate
        The last (unconverged) estimate, with its per-component flags.
    """

    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class EmptyTableError(HticaError):
    """Refusing to write an empty result table."""
