"""Empirical centroid body of a finite sample.

For rows ``x_1 .. x_N`` the centroid body of the uniform distribution on the
sample is the zonotope

    Gamma = (1/N) * sum_i [-x_i, x_i],

with support function ``h(u) = (1/N) sum |u . x_i|``.  Its gauge
(Minkowski functional) at ``q`` is ``1 / lambda*`` where

    lambda* = max l  s.t.  (1/N) sum c_i x_i = l q,  c_i in [-1, 1].

Two solvers are provided for that LP: a compiled dual simplex (default,
see :mod:`htica._gauge`) and the dense primal simplex of :mod:`htica.lp`.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from . import _gauge
from .errors import InvalidInputError, InvalidParameterError, SolverFailure
from .lp import bounded_simplex
from .sampling import check_samples

OPTIMALITY_TOL = 1e-9
BOUNDARY_TOL = 1e-9

# ring-buffer size of the vertex cache used by batched gauge queries
VERTEX_CACHE = 1024
SPAN_TOL = 1e-9


@dataclass
class LpSolution:
    """Result of the gauge LP at one query point.

    Attributes
    ----------
    status : str
        ``"optimal"`` or ``"unbounded"`` (only for ``q = 0``).
    objective : float
        ``lambda*``; ``inf`` when unbounded, ``0`` when ``q`` is outside
        the span of the sample.
    coefficients : ndarray, shape (N,)
        An attaining coefficient vector with entries in ``[-1, 1]``.
    scale : float
        Value of the scalar LP variable at the optimum (equals ``objective``).
    dual : ndarray, shape (n,)
        Minimiser ``u`` of ``h(u)`` over ``q . u = 1`` (dual solver only).
    iterations : int
    """

    status: str
    objective: float
    coefficients: np.ndarray
    scale: float
    dual: np.ndarray | None = None
    iterations: int = 0

    @property
    def gauge(self) -> float:
        if self.status == "unbounded":
            return 0.0
        return np.inf if self.objective <= 0 else 1.0 / self.objective


@dataclass(frozen=True)
class OracleAnswer:
    """Membership verdict; ``verdict`` is ``"YES"`` iff ``gauge <= 1``."""

    verdict: str
    epsilon: float
    gauge: float

    def __bool__(self) -> bool:
        return self.verdict == "YES"


def _merge_parallel(points: np.ndarray):
    """Collapse rows on a common line through the origin.

    Returns generators ``G`` (one per line, pointing along a canonical
    direction with length equal to the summed row norms), plus for every
    original row the generator index (``-1`` for zero rows) and the sign
    relating the row to that generator.
    """
    N, n = points.shape
    norms = np.linalg.norm(points, axis=1)
    nonzero = norms > 0
    group = np.full(N, -1, dtype=np.int64)
    sign = np.zeros(N)
    if not np.any(nonzero):
        return np.zeros((0, n)), group, sign
    U = points[nonzero] / norms[nonzero, None]
    lead = U[np.arange(U.shape[0]), np.argmax(np.abs(U) > 1e-12, axis=1)]
    s = np.where(lead < 0, -1.0, 1.0)
    U = U * s[:, None]
    key = np.round(U, 12) + 0.0  # +0.0 folds -0.0 into 0.0
    _, inverse = np.unique(key, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    m = inverse.max() + 1
    G = np.zeros((m, n))
    np.add.at(G, inverse, points[nonzero] * s[:, None])
    group[nonzero] = inverse
    sign[nonzero] = s
    return G, group, sign


class EmpiricalCentroidBody:
    """Zonotope ``(1/N) sum [-x_i, x_i]`` of a finite sample.

    The instance is immutable; queries allocate private scratch space and
    may run concurrently.

    Parameters
    ----------
    points : array_like, shape (N, n)
    """

    def __init__(self, points):
        X = check_samples(points)
        X = np.array(X, dtype=float)
        X.setflags(write=False)
        self.points = X
        self.N, self.n = X.shape
        G, group, sign = _merge_parallel(X)
        self._gen = np.ascontiguousarray(G)
        self._gen_norms = np.linalg.norm(G, axis=1)
        self._group = group
        self._sign = sign
        # orthonormal basis of the span, kept only when it is a proper subspace
        self._span = None
        if G.shape[0] < self.n or np.linalg.matrix_rank(G) < self.n:
            if G.shape[0] == 0:
                self._span = np.zeros((self.n, 0))
            else:
                _, sv, Vt = np.linalg.svd(G, full_matrices=False)
                rank = int(np.sum(sv > sv[0] * 1e-12))
                self._span = Vt[:rank].T

    def __repr__(self):
        return f"EmpiricalCentroidBody(N={self.N}, n={self.n}, generators={self._gen.shape[0]})"

    @property
    def generators(self) -> np.ndarray:
        """Merged generators (parallel rows summed); same zonotope up to ``1/N``."""
        return self._gen

    def support_function(self, u) -> float:
        """``h(u) = (1/N) sum |u . x_i|``."""
        u = np.asarray(u, dtype=float)
        return float(np.abs(self.points @ u).sum() / self.N)

    # -- gauge LP -----------------------------------------------------------

    def _check_query(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float).reshape(-1)
        if q.shape != (self.n,):
            raise InvalidInputError(f"query must have length {self.n}, got {q.shape}")
        if not np.all(np.isfinite(q)):
            raise InvalidInputError("query must be finite")
        return q

    def _outside_span(self, Q) -> np.ndarray:
        if self._span is None:
            return np.zeros(Q.shape[0], dtype=bool)
        resid = Q - (Q @ self._span) @ self._span.T
        return np.linalg.norm(resid, axis=1) > SPAN_TOL * np.linalg.norm(Q, axis=1)

    def _default_max_iter(self) -> int:
        return 50 * (self.n + 1) + 10 * self._gen.shape[0]

    def solve_gauge_lp(self, q, method: str = "dual", max_iter: int | None = None) -> LpSolution:
        """Solve ``max l  s.t.  (1/N) sum c_i x_i = l q,  |c_i| <= 1``.

        Parameters
        ----------
        q : array_like, shape (n,)
        method : {"dual", "primal"}
            Compiled dual simplex, or the dense bounded-variable primal
            simplex (slow; meant for small bodies and cross-checks).
        max_iter : int, optional

        Returns
        -------
        LpSolution
            ``status="unbounded"`` for ``q = 0``; ``objective = 0`` when
            ``q`` is outside the span of the sample.

        Raises
        ------
        SolverFailure
            If the iteration limit is exceeded.
        """
        q = self._check_query(q)
        if not np.any(q):
            return LpSolution("unbounded", np.inf, np.zeros(self.N), np.inf)
        if method == "primal":
            return self._solve_primal(q, max_iter)
        if method != "dual":
            raise InvalidParameterError(f"unknown LP method {method!r}")
        if max_iter is None:
            max_iter = self._default_max_iter()
        if self._gen.shape[0] == 0 or self._outside_span(q[None])[0]:
            return LpSolution("optimal", 0.0, np.zeros(self.N), 0.0, None, 0)
        u = q / (q @ q)
        active = np.zeros(self.n, dtype=np.int64)
        status, nact, it, mu = _gauge.descend(
            self._gen, self._gen_norms, q, u, active, 0, OPTIMALITY_TOL, max_iter)
        if status != _gauge.OPTIMAL:
            raise SolverFailure(f"gauge LP ended with status {status}", it)
        r = self._gen @ u
        lam = float(np.abs(r).sum() / self.N)
        gen_coef = np.sign(r)
        gen_coef[active[:nact]] = np.clip(mu[:nact], -1.0, 1.0)
        coef = np.where(self._group >= 0, gen_coef[np.maximum(self._group, 0)] * self._sign, 0.0)
        return LpSolution("optimal", lam, coef, lam, u, it)

    def _solve_primal(self, q, max_iter):
        N, n = self.N, self.n
        A = np.hstack([self.points.T / N, -q[:, None]])
        c = np.zeros(N + 1)
        c[-1] = 1.0
        lo = np.concatenate([-np.ones(N), [0.0]])
        hi = np.concatenate([np.ones(N), [np.inf]])
        res = bounded_simplex(c, A, np.zeros(n), lo, hi, max_iter=max_iter)
        if res.status != "optimal":
            raise SolverFailure(f"primal simplex ended {res.status}", res.iterations)
        lam = float(res.x[-1])
        return LpSolution("optimal", lam, res.x[:N].copy(), lam, None, res.iterations)

    def minkowski_functional(self, q, method: str = "dual") -> float:
        """Gauge ``p(q) = inf{t > 0 : q in t Gamma}``; ``inf`` outside the span."""
        return self.solve_gauge_lp(q, method=method).gauge

    def membership(self, q, epsilon: float = 0.0, method: str = "dual") -> OracleAnswer:
        """Weak membership oracle: ``YES`` iff ``p(q) <= 1 + 1e-9``.

        ``epsilon`` is recorded only; the weak-membership guarantee holds
        over the draw of the sample and is sized by :func:`oracle_sample_bound`.
        """
        p = self.minkowski_functional(q, method=method)
        return OracleAnswer("YES" if p <= 1.0 + BOUNDARY_TOL else "NO", float(epsilon), float(p))

    def gauges(self, Q, max_iter: int | None = None) -> np.ndarray:
        """Gauge of every row of ``Q`` (shape ``(k, n)``).

        Solves the same LPs as :meth:`minkowski_functional` in one compiled
        loop, warm-starting each query from previously found optimal
        vertices.

        Raises
        ------
        SolverFailure
            If any LP exceeds the iteration limit.
        """
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        if Q.ndim != 2 or Q.shape[1] != self.n:
            raise InvalidInputError(f"queries must have {self.n} columns, got shape {Q.shape}")
        if not np.all(np.isfinite(Q)):
            raise InvalidInputError("queries must be finite")
        out = np.full(Q.shape[0], np.inf)
        zero = ~np.any(Q, axis=1)
        out[zero] = 0.0
        todo = ~zero & ~self._outside_span(Q)
        if not todo.any() or self._gen.shape[0] == 0:
            return out
        if max_iter is None:
            max_iter = self._default_max_iter()
        vals, its, status = _gauge.batch_objectives(
            self._gen, self._gen_norms, np.ascontiguousarray(Q[todo]),
            OPTIMALITY_TOL, max_iter, VERTEX_CACHE)
        if np.any(status != _gauge.OPTIMAL):
            k = int(np.flatnonzero(status != _gauge.OPTIMAL)[0])
            raise SolverFailure(f"gauge LP ended with status {status[k]}", int(its[k]))
        lam = vals / self.N
        with np.errstate(divide="ignore"):
            out[todo] = np.where(lam > 0, 1.0 / lam, np.inf)
        return out


def point_from_coefficients(body: EmpiricalCentroidBody, coef) -> np.ndarray:
    """``(1/N) sum c_i x_i``; lies in the body whenever ``|c_i| <= 1``."""
    return np.asarray(coef, dtype=float) @ body.points / body.N


# -- sample-size bounds -------------------------------------------------------

def _check_unit(name, value, lo=0.0, hi=1.0):
    if not (lo < value < hi):
        raise InvalidParameterError(f"{name} must lie in ({lo}, {hi}), got {value}")


def _ceil(x: float) -> int:
    # ceil with a guard against 8**2.5 = 181.0193... style float noise
    r = round(x)
    return int(r) if abs(x - r) <= 1e-9 * max(1.0, abs(x)) else int(ceil(x))


def chebyshev_threshold(M: float, gamma: float, epsilon: float) -> int:
    """Smallest ``N >= (8M/eps)^(1/2 + 1/gamma)``."""
    return _ceil((8.0 * M / epsilon) ** (0.5 + 1.0 / gamma))


def chebyshev_tail_size(M: float, gamma: float, epsilon: float, delta: float) -> int:
    """Smallest ``N`` with ``8M / (eps^2 N^(gamma/3)) <= delta``."""
    return _ceil((8.0 * M / (epsilon ** 2 * delta)) ** (3.0 / gamma))


def chebyshev_sample_bound(M: float, gamma: float, epsilon: float, delta: float) -> int:
    """Sample size making an empirical mean of ``|X|`` ``epsilon``-accurate w.p. ``1 - delta``.

    For ``E|X|^(1+gamma) <= M`` the deviation probability is at most
    ``8M / (eps^2 N^(gamma/3))`` once ``N >= (8M/eps)^(1/2 + 1/gamma)``;
    the result is the smallest ``N`` meeting both conditions.
    """
    if M < 1:
        raise InvalidParameterError(f"moment bound M must be >= 1, got {M}")
    _check_unit("gamma", gamma)
    _check_unit("epsilon", epsilon, hi=1.0 + 1e-15)
    _check_unit("delta", delta, hi=1.0 + 1e-15)
    return max(chebyshev_threshold(M, gamma, epsilon),
               chebyshev_tail_size(M, gamma, epsilon, delta))


def inner_ball_bound(M: float, gamma: float, epsilon_prime: float, delta_prime: float,
                     n: int) -> int:
    """Sample size after which ``(1 - eps') B_1^n`` lies in the empirical body.

    ``N >= (16 M n^4 / (eps'^2 delta'))^(1/2 + 3/gamma)``.
    """
    if M < 1:
        raise InvalidParameterError(f"moment bound M must be >= 1, got {M}")
    if n < 1:
        raise InvalidParameterError("dimension must be positive")
    if gamma <= 0:
        raise InvalidParameterError("gamma must be positive")
    _check_unit("epsilon_prime", epsilon_prime, hi=1.0 + 1e-15)
    _check_unit("delta_prime", delta_prime, hi=1.0 + 1e-15)
    base = 16.0 * M * n ** 4 / (epsilon_prime ** 2 * delta_prime)
    return _ceil(base ** (0.5 + 3.0 / gamma))


def centroid_approximation_bound(M: float, gamma: float, epsilon: float, delta: float,
                                 n: int) -> int:
    """Sample size putting a fixed point of the true body within ``epsilon`` of the empirical one."""
    if M < 1 or n < 1 or gamma <= 0 or epsilon <= 0 or not (0 < delta <= 1):
        raise InvalidParameterError("parameters out of range")
    return max(_ceil((8.0 * M * n ** 2 / (epsilon ** 2 * delta)) ** (3.0 / gamma)),
               _ceil((8.0 * M * np.sqrt(n) / epsilon) ** (0.5 + 1.0 / gamma)))


def oracle_sample_bound(M: float, gamma: float, epsilon: float, delta: float, n: int,
                        s_max: float, s_min: float) -> int:
    """Explicit sample size for the weak membership oracle.

    Maximum of the NO-case requirement
    ``max{(8Mn s^(1+g) / (eps^2 delta))^(3/g), (8Mn s^(1+g)/eps)^(1/2+1/g)}``
    with ``s = s_max`` and the YES-case requirement
    ``(8 M n^2 / (r^2 delta))^(1/2 + 1/g)`` with
    ``r = eps s_min / (2 n s_max)``.
    """
    if M < 1 or n < 1 or gamma <= 0 or epsilon <= 0 or not (0 < delta <= 1):
        raise InvalidParameterError("parameters out of range")
    if s_min <= 0 or s_max < s_min:
        raise InvalidParameterError("need 0 < s_min <= s_max")
    moment = 8.0 * M * n * s_max ** (1.0 + gamma)
    no_case = max(_ceil((moment / (epsilon ** 2 * delta)) ** (3.0 / gamma)),
                  _ceil((moment / epsilon) ** (0.5 + 1.0 / gamma)))
    r = epsilon * s_min / (2.0 * n * s_max)
    yes_case = _ceil((8.0 * M * n ** 2 / (r ** 2 * delta)) ** (0.5 + 1.0 / gamma))
    return max(no_case, yes_case)
