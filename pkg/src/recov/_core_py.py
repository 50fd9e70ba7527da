"""Pure numpy implementations of the hot kernels.

These mirror the compiled versions in ``_core.pyx`` one for one and are used
when the extension is missing or ``RECOV_PURE_PYTHON=1`` is set.
"""

import numpy as np

# variable status codes shared with the compiled core
BASIC, AT_LOWER, AT_UPPER, FREE, FIXED = 0, 1, 2, 3, 4
# simplex exit codes
OPTIMAL, UNBOUNDED, ITERATION_LIMIT, SINGULAR = 0, 2, 3, 4

_RATIO_TIE = 1e-12


def refactor(A, b, x, basis, binv):
    """Rebuild the basis inverse and recompute basic values in place."""
    B = A[:, basis]
    try:
        inv = np.linalg.inv(B)
    except np.linalg.LinAlgError:
        return False
    if not np.all(np.isfinite(inv)):
        return False
    binv[:, :] = inv
    xb = x.copy()
    xb[basis] = 0.0
    x[basis] = inv @ (b - A @ xb)
    return True


def simplex_iterate(A, b, cost, lo, hi, x, basis, vstat, binv, max_iter,
                    tol_opt, tol_piv, bland_after, refactor_every):
    """Bounded-variable revised simplex from a primal feasible basis.

    Modifies ``x``, ``basis``, ``vstat`` and ``binv`` in place and returns
    ``(status, iterations)``.
    """
    m, n = A.shape
    it = 0
    degenerate = 0
    bland = False
    tol_d = tol_opt * max(1.0, float(np.max(np.abs(cost))) if n else 1.0)
    while it < max_iter:
        if it > 0 and it % refactor_every == 0:
            if not refactor(A, b, x, basis, binv):
                return SINGULAR, it
        y = cost[basis] @ binv
        d = cost - y @ A
        cand = (((vstat == AT_LOWER) & (d < -tol_d))
                | ((vstat == AT_UPPER) & (d > tol_d))
                | ((vstat == FREE) & (np.abs(d) > tol_d)))
        if not cand.any():
            return OPTIMAL, it
        if bland:
            j = int(np.argmax(cand))
        else:
            j = int(np.argmax(np.where(cand, np.abs(d), -1.0)))
        sgn = 1.0 if d[j] < 0 else -1.0
        alpha = binv @ A[:, j]
        delta = -sgn * alpha
        xb = x[basis]
        lob = lo[basis]
        hib = hi[basis]
        ratios = np.full(m, np.inf)
        big = np.abs(alpha) > tol_piv
        dec = big & (delta < 0) & np.isfinite(lob)
        inc = big & (delta > 0) & np.isfinite(hib)
        ratios[dec] = (xb[dec] - lob[dec]) / (-delta[dec])
        ratios[inc] = (hib[inc] - xb[inc]) / delta[inc]
        np.maximum(ratios, 0.0, out=ratios)
        t_flip = hi[j] - lo[j]
        r = -1
        t = np.inf
        if m:
            tmin = float(ratios.min())
            if np.isfinite(tmin):
                ties = np.flatnonzero(ratios <= tmin + _RATIO_TIE)
                if bland:
                    r = int(ties[np.argmin(basis[ties])])
                else:
                    a = np.abs(alpha[ties])
                    best = np.flatnonzero(a >= a.max())
                    cands = ties[best]
                    r = int(cands[np.argmin(basis[cands])])
                t = tmin
        if not np.isfinite(t) and not np.isfinite(t_flip):
            return UNBOUNDED, it
        it += 1
        if t_flip <= t:
            t = t_flip
            x[j] += sgn * t
            x[basis] = xb + delta * t
            vstat[j] = AT_UPPER if sgn > 0 else AT_LOWER
        else:
            x[j] += sgn * t
            x[basis] = xb + delta * t
            leave = int(basis[r])
            if delta[r] < 0:
                x[leave] = lo[leave]
                vstat[leave] = FIXED if lo[leave] == hi[leave] else AT_LOWER
            else:
                x[leave] = hi[leave]
                vstat[leave] = FIXED if lo[leave] == hi[leave] else AT_UPPER
            basis[r] = j
            vstat[j] = BASIC
            piv = alpha[r]
            row = binv[r, :] / piv
            binv -= np.outer(alpha, row)
            binv[r, :] = row
        if t <= tol_piv:
            degenerate += 1
            if degenerate >= bland_after:
                bland = True
        else:
            degenerate = 0
            bland = False
    return ITERATION_LIMIT, it


def sign_patterns(m):
    """All sign vectors of length m with first entry +1, shape (2**(m-1), m)."""
    k = max(m - 1, 0)
    idx = np.arange(2 ** k, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(k, dtype=np.int64)[None, :]) & 1
    s = np.ones((2 ** k, m))
    s[:, 1:] = 1.0 - 2.0 * bits
    return s


def cube_vertex_max(P, weights, norm_code, p):
    """Max of the norm of P @ s over sign vectors s with s[0] = +1.

    norm_code 0 is the weighted sup norm (weights ignored), 1 is the weighted
    p-norm. Returns (value, index of maximizing pattern in binary order).
    """
    N, m = P.shape
    best = -1.0
    best_idx = 0
    chunk = 1 << min(max(m - 1, 0), 14)
    total = 1 << max(m - 1, 0)
    k = max(m - 1, 0)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = (idx[:, None] >> np.arange(k, dtype=np.int64)[None, :]) & 1
        s = np.ones((idx.size, m))
        s[:, 1:] = 1.0 - 2.0 * bits
        V = s @ P.T
        if norm_code == 0:
            vals = np.max(np.abs(V), axis=1)
        else:
            vals = (np.abs(V) ** p @ weights) ** (1.0 / p)
        i = int(np.argmax(vals))
        if vals[i] > best + 1e-15 * max(1.0, best):
            best = float(vals[i])
            best_idx = int(idx[i])
    return best, best_idx


def riesz_product(signs, w):
    """Cellwise product of (1 + w_j r_j) for sign table ``signs`` (m, K)."""
    return np.prod(1.0 + w[:, None] * signs, axis=0)


def greedy_cover(C, delta, max_size):
    """Farthest-point net of the rows of C in the sup norm.

    Returns the selected row indices and the final covering radius.
    """
    K = C.shape[0]
    if K == 0:
        return np.zeros(0, dtype=np.intp), 0.0
    chosen = [0]
    dist = np.max(np.abs(C - C[0]), axis=1)
    while len(chosen) < max_size:
        i = int(np.argmax(dist))
        if dist[i] <= delta:
            break
        chosen.append(i)
        np.minimum(dist, np.max(np.abs(C - C[i]), axis=1), out=dist)
    return np.asarray(chosen, dtype=np.intp), float(dist.max())


def pairwise_max_dist(P, weights, norm_code, p):
    """Largest pairwise distance between rows of P, with the maximizing pair."""
    K = P.shape[0]
    best = 0.0
    pair = (0, 0)
    for i in range(K - 1):
        D = P[i + 1:] - P[i]
        if norm_code == 0:
            vals = np.max(np.abs(D), axis=1)
        elif norm_code == 1:
            vals = (np.abs(D) ** p @ weights) ** (1.0 / p)
        else:
            vals = np.sqrt((D * D) @ weights)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best = float(vals[k])
            pair = (i, i + 1 + k)
    return best, pair
