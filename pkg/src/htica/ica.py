"""FastICA and the heavy-tailed ICA pipeline.

The pipeline is: orthogonalize (``B``), multiply the samples by ``B``,
optionally damp, then run symmetric FastICA.  FastICA returns an estimate of
``B A`` up to column order and sign, which is mapped back by ``B^-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from .damping import DampingParams, DampingReport, choose_R, damp
from .errors import InvalidInputError, InvalidParameterError, SingularScatterError, UnconvergedResultError
from .evaluation import RecoveryReport, evaluate
from .orthogonalize import METHODS, Orthogonalizer, diagnostics, orthogonalize
from .sampling import check_samples

CONTRASTS = ("pow3", "tanh")


@dataclass(frozen=True)
class ContrastFunction:
    """Nonlinearity ``g`` and its derivative for the fixed-point update.

    ``pow3``: ``g(u) = u^3``; ``tanh``: ``g(u) = tanh(u)`` (the derivative
    of ``log cosh``).
    """

    kind: str = "pow3"

    def __post_init__(self):
        if self.kind not in CONTRASTS:
            raise InvalidParameterError(f"unknown contrast {self.kind!r}; expected one of {CONTRASTS}")

    def g(self, u):
        u = np.asarray(u, dtype=float)
        return u * u * u if self.kind == "pow3" else np.tanh(u)

    def g_prime(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "pow3":
            return 3.0 * u * u
        return 1.0 - np.tanh(u) ** 2

    def both(self, u):
        """``(g(u), g'(u))`` sharing intermediate work."""
        if self.kind == "pow3":
            u2 = u * u
            return u2 * u, 3.0 * u2
        t = np.tanh(u)
        return t, 1.0 - t * t


def as_contrast(contrast) -> ContrastFunction:
    return contrast if isinstance(contrast, ContrastFunction) else ContrastFunction(contrast)


@dataclass(frozen=True)
class IcaEstimate:
    """Result of FastICA.

    Attributes
    ----------
    A_hat : ndarray, shape (n, n)
        Estimated mixing matrix with unit-norm columns.
    W : ndarray, shape (n, n)
        Orthonormal unmixing rotation of the whitened data (rows are the
        unmixing directions).
    iterations : ndarray of int
        Sweeps used, per component (equal in the symmetric scheme).
    converged : ndarray of bool
        Per-component convergence flags.
    contrast : str
    restarts : int
        Random initialisations tried before this result.
    """

    A_hat: np.ndarray
    W: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    contrast: str = "pow3"
    restarts: int = 1

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))


def random_rotation(n: int, rng) -> np.ndarray:
    """Haar-random orthogonal matrix from the QR factor of a Gaussian matrix."""
    gen = _rng.as_generator(rng)
    Q, R = np.linalg.qr(gen.standard_normal((n, n)))
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


def _sym_decorrelate(W):
    # (W W^T)^(-1/2) W, via the SVD W = U s V^T  ->  U V^T
    U, _, Vt = np.linalg.svd(W)
    return U @ Vt


def whiten(samples):
    """Centre and whiten; returns ``(Z, K, mean)`` with ``Z = (X - mean) K^T``.

    ``K`` is the symmetric inverse square root of the sample covariance.

    Raises
    ------
    SingularScatterError
        If the sample covariance is numerically singular.
    """
    X = check_samples(samples)
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / X.shape[0]
    w, E = np.linalg.eigh(0.5 * (cov + cov.T))
    if not w[0] > 1e-12 * max(w[-1], 1e-300):
        raise SingularScatterError(f"sample covariance is singular (eigenvalues {w[0]:.3g} .. {w[-1]:.3g})")
    K = (E / np.sqrt(w)) @ E.T
    return Xc @ K.T, K, mean


def fastica(samples, contrast="pow3", rng=None, tol: float = 1e-6,
            max_iter: int = 1000, W_init=None) -> IcaEstimate:
    """Symmetric FastICA.

    Each sweep applies ``w <- mean[z g(w.z)] - mean[g'(w.z)] w`` to every
    row of ``W`` and re-orthonormalises symmetrically.  Converged when
    ``min_i |<w_i new, w_i old>| >= 1 - tol``; otherwise the flags are left
    False after ``max_iter`` sweeps.

    Parameters
    ----------
    samples : array_like, shape (N, n)
        Needs ``N > n``.
    contrast : {"pow3", "tanh"} or ContrastFunction
    rng : Generator, int or None
        Source of the random initial rotation.
    W_init : ndarray, optional
        Initial rotation; overrides ``rng``.

    Raises
    ------
    InsufficientSamplesError, SingularScatterError
    """
    X = check_samples(samples, min_rows=2)
    N, n = X.shape
    if N <= n:
        raise InvalidInputError(f"FastICA needs more rows than columns, got {N}x{n}")
    cf = as_contrast(contrast)
    Z, K, _ = whiten(X)
    W = random_rotation(n, rng) if W_init is None else _sym_decorrelate(np.asarray(W_init, float))
    it = 0
    converged = np.zeros(n, dtype=bool)
    for it in range(1, max_iter + 1):
        WZ = Z @ W.T
        g, gp = cf.both(WZ)
        W_new = _sym_decorrelate(g.T @ Z / N - gp.mean(axis=0)[:, None] * W)
        match = np.abs(np.einsum("ij,ij->i", W_new, W))
        W = W_new
        converged = match >= 1.0 - tol
        if converged.all():
            break
    # sources s = W K x, so the mixing estimate is (W K)^-1 = K^-1 W^T
    A_hat = np.linalg.solve(K, W.T)
    A_hat /= np.linalg.norm(A_hat, axis=0)
    return IcaEstimate(A_hat, W, np.full(n, it), converged, cf.kind)


@dataclass(frozen=True)
class PipelineConfig:
    """One heavy-tailed ICA pipeline.

    Attributes
    ----------
    orthogonalizer : str
        ``centroid``, ``covariance``, ``oracle`` or ``identity``.
    damping : bool
    damping_params : DampingParams
    contrast : str
    max_restarts : int
        FastICA attempts before giving up.
    convergence_tol, max_iter
        Passed to :func:`fastica`.
    body_size : int or None
        Build the centroid body on at most this many (evenly strided) rows.
    orth_size : int or None
        Fit ``B`` on the first ``orth_size`` rows only; it is still applied
        to every row.
    """

    orthogonalizer: str = "centroid"
    damping: bool = True
    damping_params: DampingParams = field(default_factory=DampingParams)
    contrast: str = "pow3"
    max_restarts: int = 10
    convergence_tol: float = 1e-6
    max_iter: int = 1000
    body_size: int | None = None
    orth_size: int | None = None

    def __post_init__(self):
        if self.orthogonalizer not in METHODS:
            raise InvalidParameterError(f"unknown orthogonalizer {self.orthogonalizer!r}")
        as_contrast(self.contrast)
        if self.max_restarts < 1:
            raise InvalidParameterError("max_restarts must be at least 1")
        for name in ("body_size", "orth_size"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise InvalidParameterError(f"{name} must be positive")

    @property
    def label(self) -> str:
        return f"{self.orthogonalizer}/{self.contrast}/{'damped' if self.damping else 'raw'}"


@dataclass(frozen=True)
class PipelineResult:
    """Everything :func:`run_htica` produced; unpacks as ``(estimate, report)``."""

    estimate: IcaEstimate
    report: RecoveryReport | None
    orthogonalizer: Orthogonalizer
    damping: DampingReport | None = None

    def __iter__(self):
        return iter((self.estimate, self.report))


def fit_orthogonalizer(samples, config: PipelineConfig, A_truth=None) -> Orthogonalizer:
    """The ``B`` that :func:`run_htica` would use for ``config``."""
    X = check_samples(samples)
    if config.orth_size is not None:
        X = X[:config.orth_size]
    return orthogonalize(X, config.orthogonalizer, A=A_truth, body_size=config.body_size)


def _streams(rng):
    # an int seed gives order-independent substreams; a Generator is consumed in order
    if isinstance(rng, (int, np.integer)):
        seed = int(rng)
        return (_rng.substream(seed, _rng.DAMPING),
                lambda k: _rng.substream(seed, _rng.FASTICA, k))
    gen = _rng.as_generator(rng)
    return gen, lambda k: gen


def run_htica(samples, config: PipelineConfig | None = None, rng=0, A_truth=None,
              orthogonalizer: Orthogonalizer | None = None) -> PipelineResult:
    """Orthogonalize, optionally damp, run FastICA, and map back.

    Parameters
    ----------
    samples : array_like, shape (N, n)
    config : PipelineConfig
    rng : int or Generator
        An int seed derives independent streams for damping and for each
        FastICA restart.
    A_truth : ndarray, optional
        True mixing matrix; required by the ``oracle`` orthogonalizer and
        enables the recovery report.
    orthogonalizer : Orthogonalizer, optional
        Precomputed ``B`` (e.g. shared between pipelines on the same data).

    Raises
    ------
    UnconvergedResultError
        If no FastICA restart converged; the last estimate is attached.
    """
    config = config or PipelineConfig()
    X = check_samples(samples)
    damp_rng, ica_rng = _streams(rng)
    orth = orthogonalizer or fit_orthogonalizer(X, config, A_truth)
    Y = orth.apply(X)
    report_d = None
    if config.damping:
        params = config.damping_params
        R = params.R if params.R is not None else choose_R(Y, params)
        report_d = damp(Y, R, damp_rng)
        Y = report_d.accepted

    est = None
    for k in range(config.max_restarts):
        est = fastica(Y, config.contrast, ica_rng(k), config.convergence_tol, config.max_iter)
        if est.all_converged:
            break
    est = IcaEstimate(est.A_hat, est.W, est.iterations, est.converged, est.contrast, k + 1)
    A_hat = np.linalg.solve(orth.B, est.A_hat)
    A_hat /= np.linalg.norm(A_hat, axis=0)
    est = IcaEstimate(A_hat, est.W, est.iterations, est.converged, est.contrast, est.restarts)
    if not est.all_converged:
        raise UnconvergedResultError(
            f"FastICA did not converge in {config.max_restarts} attempts", est)

    report = None
    if A_truth is not None:
        A_truth = np.asarray(A_truth, dtype=float)
        # ICA cannot recover column scale; compare against unit columns
        A_unit = A_truth / np.linalg.norm(A_truth, axis=0)
        report = evaluate(A_unit, A_hat, diagnostics(orth, A_truth),
                          method=config.orthogonalizer, contrast=config.contrast,
                          N=X.shape[0], damping=config.damping)
    return PipelineResult(est, report, orth, report_d)
