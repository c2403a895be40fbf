"""Compiled kernel for the zonotope gauge LP.

For a point set ``P`` (rows ``p_i``) the zonotope ``K = (1/N) sum [-p_i, p_i]``
has support function ``h(u) = (1/N) sum |p_i . u|``, so by LP duality

    lambda* = max{l : l q in K} = min{h(u) : q . u = 1}.

The kernel minimises ``sum_i |p_i . u|`` over ``q . u = 1`` with a dual
simplex: ``u`` moves along edges of the arrangement of hyperplanes
``p_i . u = 0``, keeping an active set of at most ``n - 1`` of them, and each
step is an exact line search over the breakpoints of the piecewise linear
objective (a bound-flipping ratio test in primal terms).  At optimality the
primal coefficients are ``sign(p_i . u)`` off the active set and the
multipliers ``mu_j in [-1, 1]`` on it.
"""

from __future__ import annotations

import numpy as np
from numba import njit

OPTIMAL = 0
ITERATION_LIMIT = 1
UNBOUNDED = 2
STALLED = 3

_ZERO_RESIDUAL = 1e-13
_ZERO_RATE = 1e-12
_PROJ_TOL = 1e-10
_BLAND_AFTER = 50
_REFRESH = 16


@njit(cache=True)
def _swap(t, w, idx, i, j):
    t[i], t[j] = t[j], t[i]
    w[i], w[j] = w[j], w[i]
    idx[i], idx[j] = idx[j], idx[i]


@njit(cache=True)
def _weighted_select(t, w, idx, count, need):
    """Position of the breakpoint where cumulative weight first reaches ``need``.

    Equivalent to scanning ``t`` in ascending order (ties by ``idx``) but
    runs in expected linear time; ``t``, ``w`` and ``idx`` are reordered in
    place.  Returns -1 if the total weight falls short.
    """
    lo, hi = 0, count
    tied = False
    while hi - lo > 16:
        a, b, c = t[lo], t[(lo + hi) // 2], t[hi - 1]
        pivot = max(min(a, b), min(max(a, b), c))
        # three-way partition: [lo, lt) < pivot, [lt, gt) == pivot, [gt, hi) > pivot
        lt, i, gt = lo, lo, hi
        while i < gt:
            if t[i] < pivot:
                _swap(t, w, idx, i, lt)
                lt += 1
                i += 1
            elif t[i] > pivot:
                gt -= 1
                _swap(t, w, idx, i, gt)
            else:
                i += 1
        below = 0.0
        for i in range(lo, lt):
            below += w[i]
        if below >= need:
            hi = lt
            continue
        need -= below
        tie = 0.0
        for i in range(lt, gt):
            tie += w[i]
        if tie >= need:
            lo, hi = lt, gt
            tied = True
            break
        need -= tie
        lo = gt
    if tied and hi - lo > 16:
        # equal breakpoints: scan in index order, which keeps the entering
        # row deterministic for the anti-cycling rule
        order = np.argsort(idx[lo:hi]) + lo
        for i in order:
            need -= w[i]
            if need <= 0.0:
                return i
        return order[-1]
    for i in range(lo + 1, hi):
        j = i
        while j > lo and (t[j - 1] > t[j] or (t[j - 1] == t[j] and idx[j - 1] > idx[j])):
            _swap(t, w, idx, j, j - 1)
            j -= 1
    for i in range(lo, hi):
        need -= w[i]
        if need <= 0.0:
            return i
    return -1


@njit(cache=True)
def _cholesky_solve(L, k, b, x):
    # solve (L L^T) x = b on the leading k x k block
    for i in range(k):
        s = b[i]
        for j in range(i):
            s -= L[i, j] * x[j]
        x[i] = s / L[i, i]
    for i in range(k - 1, -1, -1):
        s = x[i]
        for j in range(i + 1, k):
            s -= L[j, i] * x[j]
        x[i] = s / L[i, i]


@njit(cache=True)
def _clear(is_act, active, nact):
    for j in range(nact):
        is_act[active[j]] = False


@njit(cache=True)
def _scratch(m):
    # (is_act, r, c, sgn, cand_t, cand_w, cand_i)
    return (np.zeros(m, dtype=np.bool_), np.empty(m), np.empty(m), np.empty(m),
            np.empty(m), np.empty(m), np.empty(m, dtype=np.int64))


@njit(cache=True)
def descend(P, norms, q, u, active, nact, tol, max_iter):
    """Run the dual simplex from ``u`` with active rows ``active[:nact]``.

    ``u`` and ``active`` are updated in place.  Returns
    ``(status, nact, iterations, mu)`` where ``mu[:nact]`` are the primal
    coefficients of the active rows at termination.
    """
    return _descend(P, norms, q, u, active, nact, tol, max_iter, _scratch(P.shape[0]))


@njit(cache=True)
def _descend(P, norms, q, u, active, nact, tol, max_iter, scratch):
    # scratch[0] (is_act) must be all False on entry and is left so on exit
    is_act, r, c, sgn, cand_t, cand_w, cand_i = scratch
    m, n = P.shape
    mu = np.zeros(n)
    for j in range(nact):
        is_act[active[j]] = True
    M = np.empty((n + 1, n))  # normalised constraint rows: q, then the active rows
    L = np.zeros((n + 1, n + 1))
    rhs = np.empty(n + 1)
    sol = np.empty(n + 1)
    g = np.zeros(n)
    d = np.empty(n)
    qn = np.sqrt(np.sum(q * q))
    degenerate_run = 0
    bland = False
    refresh = False

    for it in range(1, max_iter + 1):
        k = nact + 1
        for t in range(n):
            M[0, t] = q[t] / qn
        for j in range(nact):
            a = active[j]
            for t in range(n):
                M[1 + j, t] = P[a, t] / norms[a]
        for i in range(k):
            for j in range(i + 1):
                s = 0.0
                for t in range(n):
                    s += M[i, t] * M[j, t]
                for t in range(j):
                    s -= L[i, t] * L[j, t]
                if i == j:
                    L[i, i] = np.sqrt(max(s, 1e-300))
                else:
                    L[i, j] = s / L[j, j]

        # pull u back onto {q.u = 1, p_A.u = 0}
        for i in range(k):
            s = 0.0
            for t in range(n):
                s += M[i, t] * u[t]
            rhs[i] = s
        rhs[0] -= 1.0 / qn
        _cholesky_solve(L, k, rhs, sol)
        for i in range(k):
            for t in range(n):
                u[t] -= M[i, t] * sol[i]

        fresh = it == 1 or refresh or it % _REFRESH == 0
        refresh = False
        if fresh:
            # exact residuals and gradient; between refreshes both are
            # updated incrementally from the line-search rates
            unorm = np.sqrt(np.sum(u * u))
            r[:] = np.dot(P, u)
            for i in range(m):
                ri = r[i]
                if is_act[i] or abs(ri) <= _ZERO_RESIDUAL * norms[i] * unorm:
                    r[i] = 0.0
                    sgn[i] = 0.0
                else:
                    sgn[i] = 1.0 if ri > 0.0 else -1.0
            g[:] = np.dot(sgn, P)

        # project g onto the null space of M
        for i in range(k):
            s = 0.0
            for t in range(n):
                s += M[i, t] * g[t]
            rhs[i] = s
        _cholesky_solve(L, k, rhs, sol)
        gnorm = 0.0
        pnorm = 0.0
        for t in range(n):
            pt = g[t]
            for i in range(k):
                pt -= M[i, t] * sol[i]
            d[t] = -pt
            gnorm += g[t] * g[t]
            pnorm += pt * pt

        released = -1
        if not (k < n and pnorm > _PROJ_TOL * _PROJ_TOL * gnorm):
            # coefficients of g on the raw active rows; optimal iff all |a| <= 1
            jbest = -1
            best = 1.0 + tol
            for j in range(nact):
                a = sol[1 + j] / norms[active[j]]
                if abs(a) > 1.0 + tol:
                    if bland:
                        if jbest < 0 or active[j] < active[jbest]:
                            jbest = j
                    elif abs(a) > best:
                        best = abs(a)
                        jbest = j
            if jbest < 0:
                if not fresh:
                    refresh = True
                    continue
                for j in range(nact):
                    mu[j] = -sol[1 + j] / norms[active[j]]
                _clear(is_act, active, nact)
                return OPTIMAL, nact, it, mu
            a = sol[1 + jbest] / norms[active[jbest]]
            # M d = e with e = -sign(a)/norm on the released row, so the
            # raw row satisfies p_j . d = -sign(a)
            for i in range(k):
                rhs[i] = 0.0
            rhs[1 + jbest] = -np.sign(a) / norms[active[jbest]]
            _cholesky_solve(L, k, rhs, sol)
            for t in range(n):
                s = 0.0
                for i in range(k):
                    s += M[i, t] * sol[i]
                d[t] = s
            released = active[jbest]
            is_act[released] = False
            active[jbest] = active[nact - 1]
            nact -= 1

        dnorm = np.sqrt(np.sum(d * d))
        slope = 0.0
        c[:] = np.dot(P, d)
        ncand = 0
        for i in range(m):
            if is_act[i]:
                continue
            ci = c[i]
            if i == released:
                slope += abs(ci)
                continue
            if abs(ci) <= _ZERO_RATE * norms[i] * dnorm:
                continue
            ri = r[i]
            if ri == 0.0:
                slope -= abs(ci)
                cand_t[ncand] = 0.0
            elif (ri > 0.0) == (ci > 0.0):
                slope += abs(ci)
                continue
            else:
                slope -= abs(ci)
                cand_t[ncand] = -ri / ci
            cand_w[ncand] = 2.0 * abs(ci)
            cand_i[ncand] = i
            ncand += 1

        if slope >= 0.0:
            _clear(is_act, active, nact)
            return STALLED, nact, it, mu
        pick = _weighted_select(cand_t, cand_w, cand_i, ncand, -slope)
        if pick < 0:
            _clear(is_act, active, nact)
            return UNBOUNDED, nact, it, mu
        enter = cand_i[pick]
        step = cand_t[pick]

        for t in range(n):
            u[t] += step * d[t]
        is_act[enter] = True
        active[nact] = enter
        nact += 1
        unorm = np.sqrt(np.sum(u * u))
        for i in range(m):
            if is_act[i]:
                ri = 0.0
            else:
                ri = r[i] + step * c[i]
                if abs(ri) <= _ZERO_RESIDUAL * norms[i] * unorm:
                    ri = 0.0
            r[i] = ri
            si = 0.0 if ri == 0.0 else (1.0 if ri > 0.0 else -1.0)
            if si != sgn[i]:
                delta = si - sgn[i]
                for t in range(n):
                    g[t] += delta * P[i, t]
                sgn[i] = si

        if step == 0.0:
            degenerate_run += 1
            if degenerate_run > _BLAND_AFTER:
                bland = True
        else:
            degenerate_run = 0

    _clear(is_act, active, nact)
    return ITERATION_LIMIT, nact, max_iter, mu


@njit(cache=True)
def abs_residual_sum(P, u):
    """``sum_i |p_i . u|``."""
    return np.sum(np.abs(np.dot(P, u)))


@njit(cache=True)
def batch_objectives(P, norms, Q, tol, max_iter, cache_size):
    """Optimal values ``min{sum_i |p_i . u| : q . u = 1}`` for every row of ``Q``.

    Optimal vertices are kept in a ring buffer of ``cache_size`` entries,
    normalised to objective 1.  Each query starts from the cached vertex
    maximising ``q . v`` (the best lower bound on the gauge the cache
    offers) and falls back to a cold start if that fails.

    Returns ``(values, iterations, status)``; ``values[k]`` is ``inf`` for a
    zero query.
    """
    m, n = P.shape
    nq = Q.shape[0]
    values = np.empty(nq)
    iters = np.zeros(nq, dtype=np.int64)
    status = np.zeros(nq, dtype=np.int64)
    size = max(cache_size, 1)
    V = np.zeros((size, n))
    Vact = np.zeros((size, n), dtype=np.int64)
    Vn = np.zeros(size, dtype=np.int64)
    filled = 0
    head = 0
    scratch = _scratch(m)
    active = np.zeros(n, dtype=np.int64)
    u = np.empty(n)
    for k in range(nq):
        q = Q[k]
        qq = np.sum(q * q)
        if qq == 0.0:
            values[k] = np.inf
            continue
        best = -1
        best_s = 0.0
        for j in range(filled):
            s = 0.0
            for t in range(n):
                s += V[j, t] * q[t]
            if s > best_s:
                best_s = s
                best = j
        nact = 0
        if best >= 0 and best_s > 1e-9 * np.sqrt(qq * np.sum(V[best] * V[best])):
            for t in range(n):
                u[t] = V[best, t] / best_s
            nact = Vn[best]
            for j in range(nact):
                active[j] = Vact[best, j]
        else:
            for t in range(n):
                u[t] = q[t] / qq
        st, nact2, it, mu = _descend(P, norms, q, u, active, nact, tol, max_iter, scratch)
        if st != OPTIMAL and nact > 0:
            for t in range(n):
                u[t] = q[t] / qq
            st, nact2, it2, mu = _descend(P, norms, q, u, active, 0, tol, max_iter, scratch)
            it += it2
        status[k] = st
        iters[k] = it
        val = abs_residual_sum(P, u)
        values[k] = val
        if cache_size > 0 and st == OPTIMAL and val > 0.0:
            for t in range(n):
                V[head, t] = u[t] / val
            for j in range(nact2):
                Vact[head, j] = active[j]
            Vn[head] = nact2
            head = (head + 1) % size
            filled = min(filled + 1, size)
    return values, iters, status
