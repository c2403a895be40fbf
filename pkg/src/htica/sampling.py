"""Synthetic heavy-tailed ICA data.

Sources follow the symmetric density ``f_eta(x) ∝ (|x| + 1.5)**(-eta)``,
which has finite moments of order ``k < eta - 1`` only.  Draws use the
closed-form inverse of the tail function

    P(|X| > x) = ((x + 1.5) / 1.5) ** (1 - eta),

so sampling is exact and vectorised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .errors import (
    DegenerateMatrixError,
    InsufficientSamplesError,
    InvalidInputError,
    InvalidParameterError,
)

SHIFT = 1.5
MAX_MIXING_ATTEMPTS = 100
DET_FLOOR = 1e-8


def _check_eta(eta) -> np.ndarray:
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if eta.ndim != 1 or eta.size == 0:
        raise InvalidParameterError("eta must be a non-empty vector")
    if not np.all(np.isfinite(eta)) or np.any(eta <= 1.0):
        raise InvalidParameterError(f"every tail exponent must exceed 1, got {eta}")
    return eta


def check_samples(samples, min_rows: int = 1) -> np.ndarray:
    """Validate an ``(N, n)`` sample matrix and return it as a float array."""
    X = np.asarray(samples, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InvalidInputError(f"samples must be 2-D, got shape {X.shape}")
    if X.shape[0] < min_rows:
        raise InsufficientSamplesError(f"need at least {min_rows} rows, got {X.shape[0]}")
    if X.shape[1] < 1:
        raise InvalidInputError("samples must have at least one column")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("samples contain non-finite entries")
    return X


def magnitude_from_uniform(v, eta):
    """Inverse tail function: map ``v`` in (0, 1] to ``|X|`` under ``f_eta``."""
    return SHIFT * (np.power(v, -1.0 / (np.asarray(eta) - 1.0)) - 1.0)


def first_absolute_moment(eta):
    """Analytic ``E|X| = 1.5 / (eta - 2)``; infinite for ``eta <= 2``."""
    eta = np.asarray(eta, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(eta > 2.0, SHIFT / np.where(eta > 2.0, eta - 2.0, 1.0), np.inf)


def tail_cdf(x, eta):
    """CDF of ``f_eta``; used by the goodness-of-fit tests."""
    x = np.asarray(x, dtype=float)
    half = 0.5 * np.power((np.abs(x) + SHIFT) / SHIFT, 1.0 - eta)
    return np.where(x >= 0, 1.0 - half, half)


def sample_components(eta: float, size, rng) -> np.ndarray:
    """Draw an array of i.i.d. values from ``f_eta``."""
    if not np.isfinite(eta) or eta <= 1.0:
        raise InvalidParameterError(f"tail exponent must exceed 1, got {eta}")
    rng = _rng.as_generator(rng)
    v = 1.0 - rng.random(size)  # (0, 1]
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    return sign * magnitude_from_uniform(v, eta)


def sample_component(eta: float, rng) -> float:
    """Draw a single value from ``f_eta``.

    Examples
    --------
    >>> import numpy as np
    >>> x = sample_component(6.0, np.random.default_rng(0))
    >>> np.isfinite(x)
    True
    """
    return float(sample_components(eta, None, rng))


def generate_mixing_matrix(n: int, rng, orthogonal: bool = False) -> np.ndarray:
    """Random ``n x n`` mixing matrix with unit-norm columns.

    Entries are i.i.d. standard normal before the columns are normalised.
    With ``orthogonal=True`` the Q factor of such a matrix is returned
    instead (Haar distributed, signs fixed by ``diag(R) > 0``).  Matrices
    with ``|det| < 1e-8`` are redrawn.
    """
    if n < 1:
        raise InvalidParameterError("dimension must be at least 1")
    rng = _rng.as_generator(rng)
    for _ in range(MAX_MIXING_ATTEMPTS):
        G = rng.standard_normal((n, n))
        if orthogonal:
            Q, R = np.linalg.qr(G)
            A = Q * np.where(np.diag(R) < 0, -1.0, 1.0)
        else:
            norms = np.linalg.norm(G, axis=0)
            if np.any(norms == 0):
                continue
            A = G / norms
        if abs(np.linalg.det(A)) >= DET_FLOOR:
            return A
    raise DegenerateMatrixError(f"no nonsingular {n}x{n} matrix in {MAX_MIXING_ATTEMPTS} draws")


@dataclass(frozen=True)
class IcaInstance:
    """Ground truth for ``X = A S``.

    Attributes
    ----------
    A : ndarray, shape (n, n)
        Mixing matrix.
    eta : ndarray, shape (n,)
        Tail exponent of each source.
    seed : int
        Seed from which source draws are derived.
    normalize_first_moment : bool
        Divide each source by its analytic ``E|S_i|`` (needs ``eta_i > 2``).
    """

    A: np.ndarray
    eta: np.ndarray
    seed: int = 0
    normalize_first_moment: bool = False

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        eta = _check_eta(self.eta)
        if A.ndim != 2 or A.shape != (eta.size, eta.size):
            raise InvalidInputError(f"A must be {eta.size}x{eta.size}, got {A.shape}")
        if abs(np.linalg.det(A)) <= 1e-12:
            raise InvalidInputError("mixing matrix is singular")
        if self.normalize_first_moment and np.any(eta <= 2.0):
            raise InvalidParameterError("first-moment normalisation needs every eta > 2")
        A.setflags(write=False)
        eta.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "eta", eta)

    @property
    def n(self) -> int:
        return self.eta.size

    @classmethod
    def random(cls, eta, seed: int, orthogonal: bool = False,
               normalize_first_moment: bool = False) -> "IcaInstance":
        """Instance with a mixing matrix drawn from the seed's mixing stream."""
        eta = _check_eta(eta)
        A = generate_mixing_matrix(eta.size, _rng.substream(seed, _rng.MIXING), orthogonal)
        return cls(A, eta, seed, normalize_first_moment)


def generate_sources(instance: IcaInstance, N: int) -> np.ndarray:
    """Source matrix ``S`` of shape ``(N, n)``; column ``i`` uses its own stream."""
    if N < 1:
        raise InsufficientSamplesError("N must be at least 1")
    S = np.empty((N, instance.n))
    for i, eta_i in enumerate(instance.eta):
        S[:, i] = sample_components(eta_i, N, _rng.substream(instance.seed, _rng.COMPONENT, i))
    if instance.normalize_first_moment:
        S /= first_absolute_moment(instance.eta)
    return S


def generate_ica_data(instance: IcaInstance, N: int) -> np.ndarray:
    """Observations ``x = A s``, one per row (shape ``(N, n)``)."""
    return generate_sources(instance, N) @ instance.A.T


def symmetrize(samples) -> np.ndarray:
    """Pairwise differences ``x[2k] - x[2k+1]``.

    If the rows are i.i.d. from an ICA model ``AS``, the output is an ICA
    model ``A(S - S')`` with symmetric sources.  A trailing odd row is
    dropped.
    """
    X = np.asarray(samples, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InsufficientSamplesError("symmetrize needs at least 2 rows")
    m = X.shape[0] // 2
    return X[0:2 * m:2] - X[1:2 * m:2]
