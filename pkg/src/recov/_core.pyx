# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Semantics match recov._core_py exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, pow, INFINITY

cnp.import_array()

DEF BASIC = 0
DEF AT_LOWER = 1
DEF AT_UPPER = 2
DEF FREE = 3
DEF FIXED = 4

DEF OPTIMAL = 0
DEF UNBOUNDED = 2
DEF ITERATION_LIMIT = 3
DEF SINGULAR = 4

cdef double RATIO_TIE = 1e-12


cdef bint _refactor(double[:, ::1] A, double[::1] b, double[::1] x,
                    Py_ssize_t[::1] basis, double[:, ::1] binv,
                    double[:, ::1] work, double[::1] rhs) noexcept nogil:
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1]
    cdef Py_ssize_t i, j, k, piv_row
    cdef double piv, f, best, s
    # work <- B, binv <- I, then Gauss-Jordan with partial pivoting
    for i in range(m):
        for j in range(m):
            work[i, j] = A[i, basis[j]]
            binv[i, j] = 1.0 if i == j else 0.0
    for k in range(m):
        piv_row = k
        best = fabs(work[k, k])
        for i in range(k + 1, m):
            if fabs(work[i, k]) > best:
                best = fabs(work[i, k])
                piv_row = i
        if best < 1e-300:
            return False
        if piv_row != k:
            for j in range(m):
                f = work[k, j]; work[k, j] = work[piv_row, j]; work[piv_row, j] = f
                f = binv[k, j]; binv[k, j] = binv[piv_row, j]; binv[piv_row, j] = f
        piv = work[k, k]
        for j in range(m):
            work[k, j] /= piv
            binv[k, j] /= piv
        for i in range(m):
            if i != k:
                f = work[i, k]
                if f != 0.0:
                    for j in range(m):
                        work[i, j] -= f * work[k, j]
                        binv[i, j] -= f * binv[k, j]
    # basic values x_B = B^-1 (b - A_N x_N)
    for i in range(m):
        s = b[i]
        for j in range(n):
            s -= A[i, j] * x[j]
        for k in range(m):
            s += A[i, basis[k]] * x[basis[k]]
        rhs[i] = s
    for i in range(m):
        s = 0.0
        for k in range(m):
            s += binv[i, k] * rhs[k]
        rhs[m + i] = s
    for i in range(m):
        x[basis[i]] = rhs[m + i]
    return True


def refactor(double[:, ::1] A, double[::1] b, double[::1] x,
             Py_ssize_t[::1] basis, double[:, ::1] binv):
    m = A.shape[0]
    work = np.empty((max(m, 1), max(m, 1)))
    rhs = np.empty(2 * m + 1)
    return bool(_refactor(A, b, x, basis, binv, work, rhs))


def simplex_iterate(double[:, ::1] A, double[::1] b, double[::1] cost,
                    double[::1] lo, double[::1] hi, double[::1] x,
                    Py_ssize_t[::1] basis, signed char[::1] vstat,
                    double[:, ::1] binv, long max_iter, double tol_opt,
                    double tol_piv, long bland_after, long refactor_every):
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1]
    cdef Py_ssize_t i, j, k, r, jj
    cdef long it = 0, degenerate = 0
    cdef bint bland = False
    cdef double tol_d, cmax = 1.0, dj, best, sgn, t, t_flip, ratio, tmin
    cdef double piv, a, besta, f
    cdef signed char st
    cdef int status = ITERATION_LIMIT
    cdef Py_ssize_t leave
    y_arr = np.empty(m)
    alpha_arr = np.empty(m)
    ratio_arr = np.empty(m)
    row_arr = np.empty(m)
    work_arr = np.empty((max(m, 1), max(m, 1)))
    rhs_arr = np.empty(2 * m + 1)
    cdef double[::1] rhs = rhs_arr
    cdef double[::1] y = y_arr
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] ratios = ratio_arr
    cdef double[::1] row = row_arr
    cdef double[:, ::1] work = work_arr
    for j in range(n):
        if fabs(cost[j]) > cmax:
            cmax = fabs(cost[j])
    tol_d = tol_opt * cmax
    with nogil:
        while it < max_iter:
            if it > 0 and it % refactor_every == 0:
                if not _refactor(A, b, x, basis, binv, work, rhs):
                    status = SINGULAR
                    break
            # simplex multipliers y = c_B B^-1
            for i in range(m):
                f = 0.0
                for k in range(m):
                    f += cost[basis[k]] * binv[k, i]
                y[i] = f
            # pricing
            jj = -1
            best = -1.0
            for j in range(n):
                st = vstat[j]
                if st == BASIC or st == FIXED:
                    continue
                dj = cost[j]
                for i in range(m):
                    dj -= y[i] * A[i, j]
                if (st == AT_LOWER and dj < -tol_d) or (st == AT_UPPER and dj > tol_d) \
                        or (st == FREE and fabs(dj) > tol_d):
                    if bland:
                        jj = j
                        best = dj
                        break
                    if fabs(dj) > best:
                        best = fabs(dj)
                        jj = j
            if jj < 0:
                status = OPTIMAL
                break
            j = jj
            dj = cost[j]
            for i in range(m):
                dj -= y[i] * A[i, j]
            sgn = 1.0 if dj < 0 else -1.0
            for i in range(m):
                f = 0.0
                for k in range(m):
                    f += binv[i, k] * A[k, j]
                alpha[i] = f
            # ratio test
            tmin = INFINITY
            for i in range(m):
                ratios[i] = INFINITY
                if fabs(alpha[i]) <= tol_piv:
                    continue
                f = -sgn * alpha[i]
                k = basis[i]
                if f < 0 and lo[k] > -INFINITY:
                    ratio = (x[k] - lo[k]) / (-f)
                elif f > 0 and hi[k] < INFINITY:
                    ratio = (hi[k] - x[k]) / f
                else:
                    continue
                if ratio < 0:
                    ratio = 0.0
                ratios[i] = ratio
                if ratio < tmin:
                    tmin = ratio
            r = -1
            t = INFINITY
            if tmin < INFINITY:
                besta = -1.0
                for i in range(m):
                    if ratios[i] <= tmin + RATIO_TIE:
                        if bland:
                            if r < 0 or basis[i] < basis[r]:
                                r = i
                        else:
                            a = fabs(alpha[i])
                            if r < 0 or a > besta or (a == besta and basis[i] < basis[r]):
                                besta = a
                                r = i
                t = tmin
            t_flip = hi[j] - lo[j]
            if not (t < INFINITY) and not (t_flip < INFINITY):
                status = UNBOUNDED
                break
            it += 1
            if t_flip <= t:
                t = t_flip
                x[j] += sgn * t
                for i in range(m):
                    x[basis[i]] += -sgn * alpha[i] * t
                vstat[j] = AT_UPPER if sgn > 0 else AT_LOWER
            else:
                x[j] += sgn * t
                for i in range(m):
                    x[basis[i]] += -sgn * alpha[i] * t
                leave = basis[r]
                if -sgn * alpha[r] < 0:
                    x[leave] = lo[leave]
                    vstat[leave] = FIXED if lo[leave] == hi[leave] else AT_LOWER
                else:
                    x[leave] = hi[leave]
                    vstat[leave] = FIXED if lo[leave] == hi[leave] else AT_UPPER
                basis[r] = j
                vstat[j] = BASIC
                piv = alpha[r]
                for k in range(m):
                    row[k] = binv[r, k] / piv
                for i in range(m):
                    if i == r:
                        continue
                    f = alpha[i]
                    if f != 0.0:
                        for k in range(m):
                            binv[i, k] -= f * row[k]
                for k in range(m):
                    binv[r, k] = row[k]
            if t <= tol_piv:
                degenerate += 1
                if degenerate >= bland_after:
                    bland = True
            else:
                degenerate = 0
                bland = False
    return status, it


def sign_patterns(m):
    k = max(m - 1, 0)
    idx = np.arange(2 ** k, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(k, dtype=np.int64)[None, :]) & 1
    s = np.ones((2 ** k, m))
    s[:, 1:] = 1.0 - 2.0 * bits
    return s


def cube_vertex_max(const double[:, ::1] P, const double[::1] weights, int norm_code, double p):
    """Gray-code walk over sign vectors with s[0] = +1."""
    cdef Py_ssize_t N = P.shape[0], m = P.shape[1]
    cdef Py_ssize_t i, k
    cdef long long g, prev, code, total, changed, best_code = 0
    cdef double best = -1.0, val, a, sk
    v_arr = np.zeros(N)
    s_arr = np.ones(m)
    cdef double[::1] v = v_arr
    cdef double[::1] s = s_arr
    for i in range(N):
        for k in range(m):
            v[i] += P[i, k]
    total = 1
    if m > 1:
        total = (<long long>1) << (m - 1)
    prev = 0
    with nogil:
        for g in range(total):
            code = g ^ (g >> 1)
            if g > 0:
                changed = code ^ prev
                k = 0
                while (changed >> k) != 1:
                    k += 1
                k += 1  # bit b of the code maps to column b + 1
                sk = -s[k]
                s[k] = sk
                for i in range(N):
                    v[i] += 2.0 * sk * P[i, k]
            prev = code
            val = 0.0
            if norm_code == 0:
                for i in range(N):
                    a = fabs(v[i])
                    if a > val:
                        val = a
            else:
                for i in range(N):
                    val += weights[i] * pow(fabs(v[i]), p)
                val = pow(val, 1.0 / p)
            if val > best + 1e-15 * (best if best > 1.0 else 1.0):
                best = val
                best_code = code
    return best, int(best_code)


def riesz_product(const signed char[:, ::1] signs, const double[::1] w):
    cdef Py_ssize_t m = signs.shape[0], K = signs.shape[1], j, c
    out_arr = np.ones(K)
    cdef double[::1] out = out_arr
    with nogil:
        for j in range(m):
            for c in range(K):
                out[c] *= 1.0 + w[j] * signs[j, c]
    return out_arr


def greedy_cover(const double[:, ::1] C, double delta, long max_size):
    cdef Py_ssize_t K = C.shape[0], N = C.shape[1], i, k, nxt
    cdef double d, a, far
    if K == 0:
        return np.zeros(0, dtype=np.intp), 0.0
    dist_arr = np.empty(K)
    cdef double[::1] dist = dist_arr
    chosen = [0]
    with nogil:
        for i in range(K):
            d = 0.0
            for k in range(N):
                a = fabs(C[i, k] - C[0, k])
                if a > d:
                    d = a
            dist[i] = d
    while len(chosen) < max_size:
        nxt = 0
        far = -1.0
        for i in range(K):
            if dist[i] > far:
                far = dist[i]
                nxt = i
        if far <= delta:
            break
        chosen.append(nxt)
        with nogil:
            for i in range(K):
                d = 0.0
                for k in range(N):
                    a = fabs(C[i, k] - C[nxt, k])
                    if a > d:
                        d = a
                if d < dist[i]:
                    dist[i] = d
    far = 0.0
    for i in range(K):
        if dist[i] > far:
            far = dist[i]
    return np.asarray(chosen, dtype=np.intp), float(far)


def pairwise_max_dist(const double[:, ::1] P, const double[::1] weights, int norm_code, double p):
    cdef Py_ssize_t K = P.shape[0], N = P.shape[1], i, j, k, bi = 0, bj = 0
    cdef double best = 0.0, val, a
    with nogil:
        for i in range(K - 1):
            for j in range(i + 1, K):
                val = 0.0
                if norm_code == 0:
                    for k in range(N):
                        a = fabs(P[i, k] - P[j, k])
                        if a > val:
                            val = a
                elif norm_code == 1:
                    for k in range(N):
                        val += weights[k] * pow(fabs(P[i, k] - P[j, k]), p)
                    val = pow(val, 1.0 / p)
                else:
                    for k in range(N):
                        a = P[i, k] - P[j, k]
                        val += weights[k] * a * a
                    val = sqrt(val)
                if val > best:
                    best = val
                    bi = i
                    bj = j
    return best, (int(bi), int(bj))
