"""Gaussian damping by rejection sampling.

Keeping a sample ``x`` with probability ``exp(-|x|^2 / R^2)`` turns draws
from a density ``rho`` into draws from ``rho(x) exp(-|x|^2/R^2) / K`` with
``K = E exp(-|X|^2/R^2)``.  The damped density has moments of every order,
and when the mixing matrix is orthogonal the Gaussian factor splits over the
source coordinates, so independence is preserved.

``R`` is chosen so that a target fraction of the sample (25% by default) is
rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .errors import EmptyOutputError, InvalidParameterError, UndampableSampleError
from .sampling import check_samples

MAX_BISECTIONS = 200
_BRACKET_RTOL = 1e-12

SUMMARY_FIELDS = ("R", "acceptance_rate", "K_estimate")


@dataclass(frozen=True)
class DampingParams:
    """Damping settings.

    Attributes
    ----------
    R : float or None
        Fixed damping radius; ``None`` selects it with :func:`choose_R`.
    target_rejection : float
        Fraction of samples to reject when choosing ``R``.
    tolerance : float
        Allowed deviation of the acceptance fraction from its target.
    """

    R: float | None = None
    target_rejection: float = 0.25
    tolerance: float = 0.01

    def __post_init__(self):
        if self.R is not None and not (np.isfinite(self.R) and self.R > 0):
            raise InvalidParameterError(f"R must be positive, got {self.R}")
        if not 0.0 < self.target_rejection < 1.0:
            raise InvalidParameterError("target_rejection must lie in (0, 1)")
        if not self.tolerance > 0:
            raise InvalidParameterError("tolerance must be positive")


@dataclass(frozen=True)
class DampingReport:
    """Outcome of :func:`damp`.

    Attributes
    ----------
    R : float
    acceptance_rate : float
        Fraction of input rows kept.
    K_estimate : float
        Mean weight ``exp(-|x|^2/R^2)`` over the full input.
    accepted : ndarray
        Kept rows, in input order.
    """

    R: float
    acceptance_rate: float
    K_estimate: float
    accepted: np.ndarray

    def summary(self) -> str:
        """``R,acceptance_rate,K_estimate`` as one comma-separated line."""
        return f"{self.R!r},{self.acceptance_rate!r},{self.K_estimate!r}"


def _check_R(R):
    if not (np.isfinite(R) and R > 0):
        raise InvalidParameterError(f"R must be positive, got {R}")


def _weights(sq_norms, R):
    return np.exp(-sq_norms / (R * R))


def acceptance_fraction(samples, R: float) -> float:
    """Expected fraction kept: ``(1/N) sum exp(-|x_i|^2 / R^2)``.

    Examples
    --------
    >>> round(acceptance_fraction([[1.0, 0.0]], 1.86442), 5)
    0.75
    """
    _check_R(R)
    X = check_samples(samples)
    return float(_weights(np.einsum("ij,ij->i", X, X), R).mean())


def choose_R(samples, params: DampingParams | None = None) -> float:
    """Radius at which the expected acceptance is ``1 - target_rejection``.

    Bisects on ``log R`` between ``0.01 * median |x|`` and ``100 * max |x|``
    until the bracket collapses (at most 200 steps), then checks that the
    acceptance is within ``tolerance`` of its target.

    Raises
    ------
    UndampableSampleError
        If the target acceptance is not attained inside the bracket, e.g.
        when every row is zero.
    """
    params = params or DampingParams()
    X = check_samples(samples)
    sq = np.einsum("ij,ij->i", X, X)
    norms = np.sqrt(sq)
    positive = norms[norms > 0]
    if positive.size == 0:
        raise UndampableSampleError("all rows are zero; acceptance is 1 for every R")
    median = float(np.median(norms))
    if median == 0.0:
        median = float(positive.min())
    target = 1.0 - params.target_rejection
    lo, hi = np.log(0.01 * median), np.log(100.0 * float(norms.max()))
    f_lo, f_hi = _weights(sq, np.exp(lo)).mean(), _weights(sq, np.exp(hi)).mean()
    if not (f_lo - params.tolerance <= target <= f_hi + params.tolerance):
        raise UndampableSampleError(
            f"target acceptance {target:.3g} outside [{f_lo:.3g}, {f_hi:.3g}] on the R bracket")
    mid = 0.5 * (lo + hi)
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        f = _weights(sq, np.exp(mid)).mean()
        if f == target:
            break
        if f < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _BRACKET_RTOL:
            break
    R = float(np.exp(mid))
    if abs(_weights(sq, R).mean() - target) > params.tolerance:
        raise UndampableSampleError(f"bisection ended {abs(_weights(sq, R).mean() - target):.3g} "
                                    "from the target acceptance")
    return R


def damp(samples, R: float, rng) -> DampingReport:
    """Keep each row independently with probability ``exp(-|x|^2/R^2)``.

    Raises
    ------
    EmptyOutputError
        If no row is kept.
    """
    _check_R(R)
    X = check_samples(samples)
    gen = _rng.as_generator(rng)
    w = _weights(np.einsum("ij,ij->i", X, X), R)
    keep = gen.random(X.shape[0]) < w
    if not keep.any():
        raise EmptyOutputError(f"no sample accepted at R={R:.4g}; increase R")
    return DampingReport(float(R), float(keep.mean()), float(w.mean()), X[keep])
