"""Orthogonalization matrices for the ICA model ``X = A S``.

An orthogonalizer is a matrix ``B`` such that ``B A`` has (approximately)
orthogonal columns; running ICA on ``B x`` then only has to find a rotation.

Two data-driven constructions are provided:

* centroid scaling: each sample is shrunk by ``tanh(d)/d`` where ``d`` is its
  gauge in the empirical centroid body, which makes every moment of the
  scaled data finite; ``B`` is the inverse square root of the scatter of the
  scaled samples.
* covariance: ``B`` is the inverse square root of the raw second-moment
  matrix.  It still orthogonalizes when the sources have infinite variance
  (the scatter is then dominated by a diagonal in the source basis), but
  converges more slowly.

``oracle`` (``B = A^-1``) and ``identity`` are baselines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .centroid import EmpiricalCentroidBody
from .errors import (
    DegenerateSampleSpanError,
    InvalidInputError,
    InvalidParameterError,
    SingularScatterError,
)
from .sampling import check_samples

METHODS = ("centroid", "covariance", "oracle", "identity")
EIGEN_FLOOR = 1e-12
_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class Orthogonalizer:
    """Orthogonalization matrix with provenance.

    Attributes
    ----------
    B : ndarray, shape (n, n)
    method : str
        One of ``centroid``, ``covariance``, ``oracle``, ``identity``.
    eigen_floor : float
        Smallest eigenvalue of the scatter matrix ``B`` was derived from
        (``nan`` for the baselines, which use no scatter matrix).
    scatter : ndarray or None
        The scatter matrix itself, so that ``B^-2 = scatter`` can be audited.
    """

    B: np.ndarray
    method: str
    eigen_floor: float = np.nan
    scatter: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidParameterError(f"unknown orthogonalization method {self.method!r}")
        B = np.array(self.B, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise InvalidInputError(f"B must be square, got shape {B.shape}")
        B.setflags(write=False)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.B.shape[0]

    def reconstruction_error(self) -> float:
        """``||B^-2 - C||_F / ||C||_F`` for the stored scatter ``C``."""
        if self.scatter is None:
            return 0.0
        Binv = np.linalg.inv(self.B)
        C = self.scatter
        return float(np.linalg.norm(Binv @ Binv - C) / np.linalg.norm(C))

    def apply(self, samples) -> np.ndarray:
        """Rows ``B x`` for every row ``x`` of ``samples``."""
        X = check_samples(samples)
        if X.shape[1] != self.n:
            raise InvalidInputError(f"samples have {X.shape[1]} columns, B is {self.n}x{self.n}")
        return X @ self.B.T


@dataclass(frozen=True)
class OrthogonalityDiagnostics:
    """How close ``M = B A`` is to having orthogonal columns.

    Attributes
    ----------
    sigma_min_normalized : float
        Smallest singular value of ``M`` with unit-norm columns; 1 iff the
        columns are orthogonal.
    condition_number : float
        ``sigma_max(M) / sigma_min(M)``.
    """

    sigma_min_normalized: float
    condition_number: float


def tanh_ratio(d) -> np.ndarray:
    """``tanh(d) / d`` elementwise, with the limit 1 at ``d = 0``.

    Uses ``1 - d^2/3 + 2 d^4/15`` below ``1e-4``.

    Examples
    --------
    >>> float(tanh_ratio(0.0))
    1.0
    >>> round(float(tanh_ratio(2.0)), 5)
    0.48201
    """
    d = np.asarray(d, dtype=float)
    small = np.abs(d) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, d)
    d2 = d * d
    with np.errstate(invalid="ignore"):
        out = np.where(small, 1.0 - d2 / 3.0 + 2.0 * d2 * d2 / 15.0, np.tanh(safe) / safe)
    return np.where(np.isinf(d), 0.0, out)


def inverse_sqrt(C) -> tuple[np.ndarray, float]:
    """Symmetric inverse square root ``V diag(w^-1/2) V^T`` and the smallest eigenvalue.

    Raises
    ------
    SingularScatterError
        If the smallest eigenvalue is at most ``1e-12``.
    """
    C = np.asarray(C, dtype=float)
    C = 0.5 * (C + C.T)
    w, V = np.linalg.eigh(C)
    floor = float(w[0])
    if not floor > EIGEN_FLOOR:
        raise SingularScatterError(f"scatter matrix has eigenvalue {floor:.3g} <= {EIGEN_FLOOR}")
    return (V / np.sqrt(w)) @ V.T, floor


def _body_rows(N: int, body_size: int | None) -> np.ndarray | None:
    if body_size is None or body_size >= N:
        return None
    if body_size < 1:
        raise InvalidParameterError(f"body_size must be positive, got {body_size}")
    # even stride through the sample; rows are i.i.d., so this is a fair subsample
    return (np.arange(body_size) * N) // body_size


def centroid_body(samples, body_size: int | None = None, body_points=None) -> EmpiricalCentroidBody:
    """Centroid body used to scale ``samples``.

    By default the body is built on ``samples`` themselves.  ``body_points``
    supplies a held-out sample instead; ``body_size`` builds it on an
    evenly strided subset of at most that many rows.
    """
    if body_points is not None:
        return EmpiricalCentroidBody(body_points)
    X = check_samples(samples)
    rows = _body_rows(X.shape[0], body_size)
    return EmpiricalCentroidBody(X if rows is None else X[rows])


def scale_samples_centroid(samples, body_size: int | None = None, body_points=None,
                           return_gauges: bool = False):
    """Replace each row ``x`` by ``(tanh(d)/d) x`` with ``d`` the gauge of ``x``.

    Every output row has gauge ``tanh(d) < 1``, so it lies inside the body.

    Parameters
    ----------
    samples : array_like, shape (N, n)
    body_size, body_points
        See :func:`centroid_body`.
    return_gauges : bool
        Also return the gauges ``d``.

    Raises
    ------
    DegenerateSampleSpanError
        If some row lies outside the span of the body (infinite gauge).
    """
    X = check_samples(samples)
    body = centroid_body(X, body_size, body_points)
    if body.n != X.shape[1]:
        raise InvalidInputError("body and samples differ in dimension")
    d = body.gauges(X)
    if np.any(np.isinf(d)):
        bad = int(np.flatnonzero(np.isinf(d))[0])
        raise DegenerateSampleSpanError(f"row {bad} lies outside the span of the centroid body")
    Y = X * tanh_ratio(d)[:, None]
    return (Y, d) if return_gauges else Y


def orthogonalize_centroid(samples, body_size: int | None = None,
                           body_points=None) -> Orthogonalizer:
    """``B = C^(-1/2)`` with ``C`` the scatter of the centroid-scaled samples.

    Examples
    --------
    >>> X = [[1, 0], [-1, 0], [0, 1], [0, -1]]
    >>> orth = orthogonalize_centroid(X)
    >>> np.round(orth.B, 4)
    array([[2.934, 0.   ],
           [0.   , 2.934]])
    """
    Y = scale_samples_centroid(samples, body_size, body_points)
    C = Y.T @ Y / Y.shape[0]
    B, floor = inverse_sqrt(C)
    return Orthogonalizer(B, "centroid", floor, C)


def orthogonalize_covariance(samples) -> Orthogonalizer:
    """``B = S^(-1/2)`` with ``S = (1/N) sum x x^T`` (uncentred, as the sources are symmetric)."""
    X = check_samples(samples)
    S = X.T @ X / X.shape[0]
    B, floor = inverse_sqrt(S)
    return Orthogonalizer(B, "covariance", floor, S)


def orthogonalize_oracle(A) -> Orthogonalizer:
    """``B = A^-1``; then ``B A = I``.  Not symmetric in general."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"A must be square, got shape {A.shape}")
    try:
        B = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise InvalidInputError("mixing matrix is singular") from exc
    return Orthogonalizer(B, "oracle")


def orthogonalize_identity(n: int) -> Orthogonalizer:
    return Orthogonalizer(np.eye(n), "identity")


def orthogonalize(samples, method: str, A=None, body_size: int | None = None,
                  body_points=None) -> Orthogonalizer:
    """Dispatch on ``method``; ``oracle`` needs the true mixing matrix ``A``."""
    if method == "centroid":
        return orthogonalize_centroid(samples, body_size, body_points)
    if method == "covariance":
        return orthogonalize_covariance(samples)
    if method == "oracle":
        if A is None:
            raise InvalidParameterError("the oracle orthogonalizer needs the true mixing matrix")
        return orthogonalize_oracle(A)
    if method == "identity":
        return orthogonalize_identity(check_samples(samples).shape[1])
    raise InvalidParameterError(f"unknown orthogonalization method {method!r}")


def diagnostics(B, A) -> OrthogonalityDiagnostics:
    """Singular-value diagnostics of ``M = B A``.

    ``B`` may be an :class:`Orthogonalizer` or a plain matrix.
    """
    B = B.B if isinstance(B, Orthogonalizer) else np.asarray(B, dtype=float)
    M = B @ np.asarray(A, dtype=float)
    norms = np.linalg.norm(M, axis=0)
    if np.any(norms == 0):
        return OrthogonalityDiagnostics(0.0, np.inf)
    s_hat = np.linalg.svd(M / norms, compute_uv=False)
    s = np.linalg.svd(M, compute_uv=False)
    # clip roundoff so that an orthogonal M reports exactly 1
    sigma_min = float(min(s_hat[-1], 1.0))
    cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
    return OrthogonalityDiagnostics(sigma_min, max(cond, 1.0))
