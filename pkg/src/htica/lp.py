"""Dense bounded-variable primal simplex.

Solves ``max c.x  s.t.  A x = b,  lo <= x <= hi`` with finite lower bounds
(upper bounds may be infinite).  Nonbasic variables sit at one of their
bounds; the ratio test includes the entering variable's own bound flip.
Phase 1 drives ``len(b)`` artificial variables to zero; in phase 2 they are
kept with bounds ``[0, 0]`` so a degenerate artificial may stay basic.

Meant for the small problems in this package (a handful of rows, up to a
few hundred columns).  Pricing is Dantzig's rule, switching to Bland's rule
after ``10 * (ncols + nrows)`` iterations to break cycling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SolverFailure

FEAS_TOL = 1e-8
OPT_TOL = 1e-9
PIVOT_TOL = 1e-11


@dataclass
class SimplexResult:
    status: str  # "optimal" | "unbounded" | "infeasible"
    x: np.ndarray
    objective: float
    iterations: int


def _solve_phase(c, A, b, lo, hi, basis, x, max_iter, it0, bland_after):
    m, ntot = A.shape
    it = it0
    is_basic = np.zeros(ntot, dtype=bool)
    is_basic[basis] = True
    while True:
        if it >= max_iter:
            raise SolverFailure("simplex iteration limit exceeded", it)
        bland = it - it0 >= bland_after
        B = A[:, basis]
        Binv = np.linalg.inv(B)
        nonbasic = ~is_basic
        x[basis] = Binv @ (b - A[:, nonbasic] @ x[nonbasic])

        y = c[basis] @ Binv
        d = c - y @ A
        d[is_basic] = 0.0
        at_lo = nonbasic & (x <= lo + FEAS_TOL) & (hi > lo)
        at_hi = nonbasic & (x >= hi - FEAS_TOL) & (hi > lo)
        gain = np.where(at_lo & (d > OPT_TOL), d, 0.0)
        gain = np.where(at_hi & (d < -OPT_TOL), -d, gain)
        if not np.any(gain > 0):
            return "optimal", it
        if bland:
            j = int(np.flatnonzero(gain > 0)[0])
        else:
            j = int(np.argmax(gain))
        direction = 1.0 if d[j] > 0 else -1.0

        alpha = Binv @ A[:, j]
        rate = -direction * alpha  # d x_B / d theta
        theta = hi[j] - lo[j]
        leave = -1
        leave_to = 0.0
        for r in range(m):
            v = basis[r]
            if rate[r] < -PIVOT_TOL:
                t = (x[v] - lo[v]) / -rate[r]
                bound = lo[v]
            elif rate[r] > PIVOT_TOL:
                if not np.isfinite(hi[v]):
                    continue
                t = (hi[v] - x[v]) / rate[r]
                bound = hi[v]
            else:
                continue
            t = max(t, 0.0)
            if t < theta or (t == theta and leave >= 0 and basis[r] < basis[leave]):
                theta, leave, leave_to = t, r, bound
        it += 1
        if not np.isfinite(theta):
            return "unbounded", it
        if leave < 0:
            x[j] = hi[j] if direction > 0 else lo[j]
            continue
        x[j] += direction * theta
        out = basis[leave]
        x[out] = leave_to
        is_basic[out] = False
        is_basic[j] = True
        basis[leave] = j


def bounded_simplex(c, A, b, lo, hi, max_iter: int | None = None) -> SimplexResult:
    """Maximise ``c.x`` subject to ``A x = b`` and ``lo <= x <= hi``.

    Parameters
    ----------
    c : (k,) array
    A : (m, k) array
    b : (m,) array
    lo, hi : (k,) arrays
        Bounds; ``lo`` must be finite, ``hi`` may be ``inf``.
    max_iter : int, optional
        Defaults to ``50 * (k + m)``.

    Raises
    ------
    SolverFailure
        If the iteration limit is reached.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    m, k = A.shape
    if c.shape != (k,) or b.shape != (m,) or lo.shape != (k,) or hi.shape != (k,):
        raise InvalidInputError("inconsistent LP dimensions")
    if not np.all(np.isfinite(lo)) or np.any(hi < lo):
        raise InvalidInputError("lower bounds must be finite and not exceed upper bounds")
    if max_iter is None:
        max_iter = 50 * (k + m)
    bland_after = 10 * (k + m)

    x = lo.copy()
    resid = b - A @ x
    sgn = np.where(resid < 0, -1.0, 1.0)
    A1 = np.hstack([A, np.diag(sgn)])
    lo1 = np.concatenate([lo, np.zeros(m)])
    hi1 = np.concatenate([hi, np.full(m, np.inf)])
    x1 = np.concatenate([x, np.abs(resid)])
    c1 = np.concatenate([np.zeros(k), -np.ones(m)])
    basis = np.arange(k, k + m)

    _, it = _solve_phase(c1, A1, b, lo1, hi1, basis, x1, max_iter, 0, bland_after)
    infeas = x1[k:].sum()
    if infeas > FEAS_TOL * max(1.0, np.abs(b).max(initial=0.0)):
        return SimplexResult("infeasible", x1[:k], np.nan, it)

    hi1[k:] = 0.0
    x1[k:] = np.minimum(x1[k:], 0.0)
    c2 = np.concatenate([c, np.zeros(m)])
    status, it = _solve_phase(c2, A1, b, lo1, hi1, basis, x1, max_iter, it, bland_after)
    xs = x1[:k]
    return SimplexResult(status, xs, float(c @ xs) if status == "optimal" else np.inf, it)
