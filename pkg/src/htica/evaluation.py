"""Recovery metrics for estimated mixing matrices.

ICA recovers ``A`` only up to the order and sign of its columns, so an
estimate is first aligned with the truth by an optimal signed assignment of
columns, then compared in Frobenius norm.  The Amari index needs no
alignment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidInputError
from .orthogonalize import OrthogonalityDiagnostics

UNIT_TOL = 1e-6


@dataclass(frozen=True)
class ColumnMatching:
    """Signed assignment of estimated columns to true columns.

    ``permutation[i] = j`` pairs true column ``i`` with estimated column
    ``j``, flipped by ``signs[i]``.
    """

    permutation: np.ndarray
    signs: np.ndarray
    total_cost: float

    def align(self, A_hat) -> np.ndarray:
        """Estimated matrix with columns reordered and re-signed to match the truth."""
        A_hat = np.asarray(A_hat, dtype=float)
        return A_hat[:, self.permutation] * self.signs


@dataclass(frozen=True)
class RecoveryReport:
    """Quality of one estimate against the truth."""

    frobenius_error: float
    amari_index: float
    matching: ColumnMatching
    diagnostics: OrthogonalityDiagnostics | None = None
    metadata: dict = field(default_factory=dict)


def _check_pair(A, A_hat):
    A = np.asarray(A, dtype=float)
    A_hat = np.asarray(A_hat, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A_hat.shape != A.shape:
        raise InvalidInputError(f"need two equal square matrices, got {A.shape} and {A_hat.shape}")
    return A, A_hat


def match_columns(A, A_hat) -> ColumnMatching:
    """Optimal signed column assignment (Hungarian algorithm).

    The cost of pairing ``a_i`` with ``b_j`` is
    ``min(|a_i - b_j|, |a_i + b_j|)``; the sign attaining the minimum is
    recorded.

    Raises
    ------
    InvalidInputError
        If a column of either matrix is not of unit norm (within 1e-6).

    Examples
    --------
    >>> m = match_columns(np.eye(2), [[0.6, 1.0], [0.8, 0.0]])
    >>> m.permutation.tolist(), m.signs.tolist()
    ([1, 0], [1.0, 1.0])
    """
    A, A_hat = _check_pair(A, A_hat)
    for name, M in (("A", A), ("A_hat", A_hat)):
        if np.any(np.abs(np.linalg.norm(M, axis=0) - 1.0) > UNIT_TOL):
            raise InvalidInputError(f"columns of {name} must have unit norm")
    minus = np.linalg.norm(A[:, :, None] - A_hat[:, None, :], axis=0)
    plus = np.linalg.norm(A[:, :, None] + A_hat[:, None, :], axis=0)
    cost = np.minimum(minus, plus)
    rows, cols = linear_sum_assignment(cost)
    perm = cols[np.argsort(rows)]
    idx = np.arange(A.shape[1])
    signs = np.where(minus[idx, perm] <= plus[idx, perm], 1.0, -1.0)
    return ColumnMatching(perm, signs, float(cost[idx, perm].sum()))


def frobenius_error(A, A_hat, matching: ColumnMatching | None = None) -> float:
    """``|A - aligned(A_hat)|_F``; computes the matching if not given."""
    A, A_hat = _check_pair(A, A_hat)
    if matching is None:
        matching = match_columns(A, A_hat)
    return float(np.linalg.norm(A - matching.align(A_hat)))


def amari_index(A, A_hat) -> float:
    """Amari index of ``P = A_hat^-1 A``, normalised to ``[0, 1]``.

    ``(1 / (2n(n-1))) [sum_i (sum_j |P_ij| / max_k |P_ik| - 1)
    + sum_j (sum_i |P_ij| / max_k |P_kj| - 1)]``; zero iff ``P`` is a
    scaled permutation.  For ``n = 1`` the index is 0.

    Raises
    ------
    InvalidInputError
        If ``A_hat`` is singular.
    """
    A, A_hat = _check_pair(A, A_hat)
    n = A.shape[0]
    try:
        P = np.abs(np.linalg.solve(A_hat, A))
    except np.linalg.LinAlgError as exc:
        raise InvalidInputError("A_hat is singular") from exc
    if not np.all(np.isfinite(P)):
        raise InvalidInputError("A_hat is singular")
    if n == 1:
        return 0.0
    rows = (P.sum(axis=1) / P.max(axis=1) - 1.0).sum()
    cols = (P.sum(axis=0) / P.max(axis=0) - 1.0).sum()
    return float((rows + cols) / (2.0 * n * (n - 1)))


def evaluate(A, A_hat, diagnostics: OrthogonalityDiagnostics | None = None,
             **metadata) -> RecoveryReport:
    """Match, then compute both metrics."""
    matching = match_columns(A, A_hat)
    return RecoveryReport(frobenius_error(A, A_hat, matching), amari_index(A, A_hat),
                          matching, diagnostics, dict(metadata))
