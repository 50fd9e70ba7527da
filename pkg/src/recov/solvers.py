"""Deterministic numerical cores: linear programming, least squares, p-norm fits.

The LP solver is a bounded-variable revised simplex. Pricing is Dantzig's rule
and switches to the least-index rule after a run of degenerate pivots, which
rules out cycling. Everything here is dense; problems are desk scale.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg
from scipy.optimize import nnls

from . import kernels
from .errors import ConvergenceError, RankError, SolverError, StructuralError

LE, EQ, GE = "<=", "=", ">="
_REL_CODE = {LE: -1, EQ: 0, GE: 1, "<": -1, "==": 0, ">": 1}


class LPStatus(Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"
    ITERATION_LIMIT = "ITERATION_LIMIT"
    NUMERICAL = "NUMERICAL"


@dataclass
class LinearProgram:
    """min c.x subject to rows A x (<=,=,>=) b and lower <= x <= upper.

    Bounds default to x >= 0, matching the usual LP convention.
    """

    c: np.ndarray
    A: np.ndarray = None
    relations: tuple = ()
    b: np.ndarray = None
    lower: np.ndarray = None
    upper: np.ndarray = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        if n < 1:
            raise StructuralError("a linear program needs at least one variable")
        if self.A is None:
            self.A = np.zeros((0, n))
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if self.A.size == 0:
            self.A = self.A.reshape(0, n)
        k = self.A.shape[0]
        if self.A.shape[1] != n:
            raise StructuralError(f"constraint matrix has {self.A.shape[1]} columns, expected {n}")
        self.b = np.zeros(0) if self.b is None else np.asarray(self.b, dtype=float).ravel()
        if self.b.size != k:
            raise StructuralError("right-hand side length does not match constraint rows")
        if isinstance(self.relations, str):
            self.relations = (self.relations,) * k
        rel = tuple(self.relations) if len(self.relations) else (LE,) * k
        if len(rel) != k:
            raise StructuralError("one relation per constraint row is required")
        try:
            self.relations = tuple({-1: LE, 0: EQ, 1: GE}[_REL_CODE[r]] for r in rel)
        except KeyError as exc:
            raise StructuralError(f"unknown relation {exc}") from None
        self.lower = np.zeros(n) if self.lower is None else np.broadcast_to(
            np.asarray(self.lower, dtype=float), (n,)).copy()
        self.upper = np.full(n, np.inf) if self.upper is None else np.broadcast_to(
            np.asarray(self.upper, dtype=float), (n,)).copy()
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.A))
                and np.all(np.isfinite(self.b))):
            raise StructuralError("linear program coefficients must be finite")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise StructuralError("bounds may be infinite but not NaN")

    @classmethod
    def from_parts(cls, c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lower=None, upper=None):
        c = np.asarray(c, dtype=float).ravel()
        n = c.size
        blocks, rhs, rel = [], [], []
        if A_ub is not None and np.size(A_ub):
            A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float)).reshape(-1, n)
            blocks.append(A_ub)
            rhs.append(np.asarray(b_ub, dtype=float).ravel())
            rel += [LE] * A_ub.shape[0]
        if A_eq is not None and np.size(A_eq):
            A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float)).reshape(-1, n)
            blocks.append(A_eq)
            rhs.append(np.asarray(b_eq, dtype=float).ravel())
            rel += [EQ] * A_eq.shape[0]
        A = np.vstack(blocks) if blocks else np.zeros((0, n))
        b = np.concatenate(rhs) if rhs else np.zeros(0)
        return cls(c, A, tuple(rel), b, lower, upper)

    @property
    def n_vars(self):
        return self.c.size

    @property
    def n_rows(self):
        return self.A.shape[0]


@dataclass
class BasisState:
    """Final basis of a solve, reusable when only the objective changes."""

    route: str
    basis: np.ndarray
    vstat: np.ndarray
    art_rows: np.ndarray
    art_signs: np.ndarray
    signature: tuple


@dataclass
class SolveReport:
    status: LPStatus
    solution: np.ndarray
    objective_value: float
    iterations: int
    duals: np.ndarray = None
    reduced_costs: np.ndarray = None
    primal_residual: float = np.nan
    cs_residual: float = np.nan
    duality_gap: float = np.nan
    route: str = "primal"
    basis_state: BasisState = field(default=None, repr=False)

    @property
    def optimal(self):
        return self.status is LPStatus.OPTIMAL


_TOL_OPT = 1e-10
_TOL_PIV = 1e-10
_TOL_FEAS = 1e-9
_BLAND_AFTER = 25
_REFACTOR_EVERY = 64


def _signature(A, relations, lower, upper):
    return (A.shape, hash(A.tobytes()), relations, hash(lower.tobytes()), hash(upper.tobytes()))


def _initial_nonbasic(lo, hi, x, vstat, cols):
    for j in cols:
        if lo[j] == hi[j]:
            x[j] = lo[j]
            vstat[j] = kernels.FIXED
        elif np.isfinite(lo[j]):
            x[j] = lo[j]
            vstat[j] = kernels.AT_LOWER
        elif np.isfinite(hi[j]):
            x[j] = hi[j]
            vstat[j] = kernels.AT_UPPER
        else:
            x[j] = 0.0
            vstat[j] = kernels.FREE


def _run(Af, bf, cost, lo, hi, x, basis, vstat, binv, max_iter):
    status, it = kernels.simplex_iterate(Af, bf, cost, lo, hi, x, basis, vstat, binv,
                                         int(max_iter), _TOL_OPT, _TOL_PIV,
                                         _BLAND_AFTER, _REFACTOR_EVERY)
    return int(status), int(it)


def _solve_primal(lp, warm_start=None, max_iter=None):
    A, b, c = lp.A, lp.b, lp.c
    k, n = A.shape
    scale = np.max(np.abs(A), axis=1) if k else np.zeros(0)
    scale = np.where(scale > 0, 1.0 / np.where(scale > 0, scale, 1.0), 1.0)
    As = A * scale[:, None]
    bs = b * scale
    codes = np.array([_REL_CODE[r] for r in lp.relations], dtype=int)
    slo = np.where(codes == 1, -np.inf, 0.0)
    shi = np.where(codes == -1, np.inf, 0.0)
    lo = np.concatenate([lp.lower, slo])
    hi = np.concatenate([lp.upper, shi])
    if np.any(lo > hi):
        return _report(lp, LPStatus.INFEASIBLE, np.full(n, np.nan), 0, None, None)
    sig = _signature(A, lp.relations, lp.lower, lp.upper)
    if max_iter is None:
        max_iter = 50 * (k + n) + 1000
    total_it = 0

    state = None
    if warm_start is not None and warm_start.route == "primal" and warm_start.signature == sig:
        state = _warm_state(As, bs, lo, hi, n, k, warm_start)
    if state is None:
        state = _cold_state(As, bs, lo, hi, n, k)
        if state is None:
            return _report(lp, LPStatus.NUMERICAL, np.full(n, np.nan), 0, None, None)
        Af, lo_f, hi_f, x, basis, vstat, binv, art_rows, art_signs = state
        n_art = art_rows.size
        if n_art:
            cost1 = np.zeros(Af.shape[1])
            cost1[n + k:] = 1.0
            status, it = _run(Af, bs, cost1, lo_f, hi_f, x, basis, vstat, binv, max_iter)
            total_it += it
            if status != kernels.OPTIMAL:
                return _report(lp, LPStatus.NUMERICAL if status == kernels.SINGULAR
                               else LPStatus.ITERATION_LIMIT, x[:n], total_it, None, None)
            infeas = float(np.sum(x[n + k:]))
            if infeas > _TOL_FEAS * max(1.0, float(np.max(np.abs(bs)))):
                return _report(lp, LPStatus.INFEASIBLE, x[:n].copy(), total_it, None, None)
            # artificials stay in the basis only at level zero
            hi_f[n + k:] = 0.0
            x[n + k:] = np.where(vstat[n + k:] == kernels.BASIC, x[n + k:], 0.0)
            vstat[n + k:] = np.where(vstat[n + k:] == kernels.BASIC, kernels.BASIC, kernels.FIXED)
    else:
        Af, lo_f, hi_f, x, basis, vstat, binv, art_rows, art_signs = state

    cost2 = np.zeros(Af.shape[1])
    cost2[:n] = c
    status, it = _run(Af, bs, cost2, lo_f, hi_f, x, basis, vstat, binv, max_iter)
    total_it += it
    if status == kernels.UNBOUNDED:
        return _report(lp, LPStatus.UNBOUNDED, x[:n].copy(), total_it, None, None)
    if status != kernels.OPTIMAL:
        return _report(lp, LPStatus.NUMERICAL if status == kernels.SINGULAR
                       else LPStatus.ITERATION_LIMIT, x[:n].copy(), total_it, None, None)
    # one clean refactorization before reading off values and multipliers
    kernels.refactor(Af, bs, x, basis, binv)
    y_scaled = cost2[basis] @ binv
    y = y_scaled * scale
    sol = x[:n].copy()
    ws = BasisState("primal", basis.copy(), vstat.copy(), art_rows.copy(), art_signs.copy(), sig)
    return _report(lp, LPStatus.OPTIMAL, sol, total_it, y, ws)


def _cold_state(As, bs, lo, hi, n, k):
    x = np.zeros(n + k)
    vstat = np.zeros(n + k, dtype=np.int8)
    _initial_nonbasic(lo, hi, x, vstat, range(n))
    r = bs - As @ x[:n]
    basis = np.empty(k, dtype=np.intp)
    art_rows, art_signs, art_vals = [], [], []
    slo, shi = lo[n:], hi[n:]
    tol = _TOL_FEAS * (1.0 + np.abs(bs))
    for i in range(k):
        s = n + i
        if slo[i] - tol[i] <= r[i] <= shi[i] + tol[i]:
            basis[i] = s
            x[s] = r[i]
            vstat[s] = kernels.BASIC
        else:
            proj = min(max(r[i], slo[i]), shi[i])
            x[s] = proj
            if slo[i] == shi[i]:
                vstat[s] = kernels.FIXED
            elif proj == slo[i]:
                vstat[s] = kernels.AT_LOWER
            else:
                vstat[s] = kernels.AT_UPPER
            art_rows.append(i)
            art_signs.append(1.0 if r[i] > proj else -1.0)
            art_vals.append(abs(r[i] - proj))
    n_art = len(art_rows)
    art_rows = np.asarray(art_rows, dtype=np.intp)
    art_signs = np.asarray(art_signs, dtype=float)
    Af = np.zeros((k, n + k + n_art))
    Af[:, :n] = As
    Af[:, n:n + k] = np.eye(k)
    if n_art:
        Af[art_rows, n + k + np.arange(n_art)] = art_signs
    lo_f = np.concatenate([lo, np.zeros(n_art)])
    hi_f = np.concatenate([hi, np.full(n_art, np.inf)])
    x = np.concatenate([x, np.asarray(art_vals, dtype=float)])
    vstat = np.concatenate([vstat, np.zeros(n_art, dtype=np.int8)])
    for a, i in enumerate(art_rows):
        basis[i] = n + k + a
    Af = np.ascontiguousarray(Af)
    binv = np.zeros((k, k))
    if not kernels.refactor(Af, bs, x, basis, binv):
        return None
    return Af, lo_f, hi_f, x, basis, vstat, binv, art_rows, art_signs


def _warm_state(As, bs, lo, hi, n, k, ws):
    n_art = ws.art_rows.size
    Af = np.zeros((k, n + k + n_art))
    Af[:, :n] = As
    Af[:, n:n + k] = np.eye(k)
    if n_art:
        Af[ws.art_rows, n + k + np.arange(n_art)] = ws.art_signs
    Af = np.ascontiguousarray(Af)
    lo_f = np.concatenate([lo, np.zeros(n_art)])
    hi_f = np.concatenate([hi, np.zeros(n_art)])
    basis = ws.basis.copy()
    vstat = ws.vstat.copy()
    x = np.zeros(n + k + n_art)
    for j in range(x.size):
        st = vstat[j]
        if st == kernels.AT_LOWER or st == kernels.FIXED:
            x[j] = lo_f[j]
        elif st == kernels.AT_UPPER:
            x[j] = hi_f[j]
    binv = np.zeros((k, k))
    if not kernels.refactor(Af, bs, x, basis, binv):
        return None
    xb = x[basis]
    tol = _TOL_FEAS * (1.0 + np.max(np.abs(bs))) if k else 0.0
    if np.any(xb < lo_f[basis] - tol) or np.any(xb > hi_f[basis] + tol):
        return None
    return Af, lo_f, hi_f, x, basis, vstat, binv, ws.art_rows, ws.art_signs


def _report(lp, status, sol, iterations, y, ws, route="primal"):
    obj = float(lp.c @ sol) if status is LPStatus.OPTIMAL else (
        -np.inf if status is LPStatus.UNBOUNDED else np.nan)
    rep = SolveReport(status, sol, obj, iterations, route=route, basis_state=ws)
    if status is LPStatus.OPTIMAL and y is not None:
        rep.duals = y
        _fill_residuals(lp, rep)
    return rep


def _fill_residuals(lp, rep):
    A, b, c, x, y = lp.A, lp.b, lp.c, rep.solution, rep.duals
    codes = np.array([_REL_CODE[r] for r in lp.relations], dtype=int)
    ax = A @ x
    slack = b - ax
    viol = np.zeros_like(slack)
    viol[codes == -1] = np.maximum(-slack[codes == -1], 0.0)
    viol[codes == 1] = np.maximum(slack[codes == 1], 0.0)
    viol[codes == 0] = np.abs(slack[codes == 0])
    bviol = np.maximum(np.maximum(lp.lower - x, x - lp.upper), 0.0)
    scale = 1.0 + max(np.max(np.abs(b), initial=0.0), np.max(np.abs(x), initial=0.0))
    rep.primal_residual = float(max(np.max(viol, initial=0.0), np.max(bviol, initial=0.0)) / scale)
    d = c - A.T @ y
    rep.reduced_costs = d
    # bound multipliers: positive part acts on the lower bound, negative on the upper
    bound_val = np.where(d > 0, lp.lower, lp.upper)
    bound_val = np.where(np.isfinite(bound_val), bound_val, x)
    cs_rows = np.abs(y * slack)
    cs_vars = np.abs(d * (x - bound_val))
    cscale = 1.0 + np.max(np.abs(c), initial=0.0) * scale
    rep.cs_residual = float(max(np.max(cs_rows, initial=0.0), np.max(cs_vars, initial=0.0)) / cscale)
    dual_obj = float(y @ b + d @ bound_val)
    rep.duality_gap = float(abs(rep.objective_value - dual_obj) / max(1.0, abs(rep.objective_value)))


def _dualize(lp):
    """Free-variable form: rows G x <= h (bounds included) and E x = f."""
    n = lp.n_vars
    codes = np.array([_REL_CODE[r] for r in lp.relations], dtype=int)
    G_parts, h_parts = [], []
    if np.any(codes == -1):
        G_parts.append(lp.A[codes == -1])
        h_parts.append(lp.b[codes == -1])
    if np.any(codes == 1):
        G_parts.append(-lp.A[codes == 1])
        h_parts.append(-lp.b[codes == 1])
    I = np.eye(n)
    fin_hi = np.isfinite(lp.upper)
    fin_lo = np.isfinite(lp.lower)
    fixed = fin_hi & fin_lo & (lp.lower == lp.upper)
    up_rows = fin_hi & ~fixed
    lo_rows = fin_lo & ~fixed
    if up_rows.any():
        G_parts.append(I[up_rows])
        h_parts.append(lp.upper[up_rows])
    if lo_rows.any():
        G_parts.append(-I[lo_rows])
        h_parts.append(-lp.lower[lo_rows])
    G = np.vstack(G_parts) if G_parts else np.zeros((0, n))
    h = np.concatenate(h_parts) if h_parts else np.zeros(0)
    E_parts = [lp.A[codes == 0]] if np.any(codes == 0) else []
    f_parts = [lp.b[codes == 0]] if np.any(codes == 0) else []
    if fixed.any():
        E_parts.append(I[fixed])
        f_parts.append(lp.lower[fixed])
    E = np.vstack(E_parts) if E_parts else np.zeros((0, n))
    f = np.concatenate(f_parts) if f_parts else np.zeros(0)
    return G, h, E, f


def _solve_dual(lp, max_iter=None):
    G, h, E, f = _dualize(lp)
    kg, ke = G.shape[0], E.shape[0]
    n = lp.n_vars
    # min h.y + f.z  s.t.  G^T y + E^T z = -c,  y >= 0, z free
    AD = np.hstack([G.T, E.T])
    lower = np.concatenate([np.zeros(kg), np.full(ke, -np.inf)])
    upper = np.full(kg + ke, np.inf)
    dual_lp = LinearProgram(np.concatenate([h, f]), AD, (EQ,) * n, -lp.c, lower, upper)
    rep = _solve_primal(dual_lp, max_iter=max_iter)
    if rep.status is LPStatus.UNBOUNDED:
        return _report(lp, LPStatus.INFEASIBLE, np.full(n, np.nan), rep.iterations, None, None, "dual")
    if rep.status is LPStatus.INFEASIBLE:
        # primal feasible iff the homogeneous dual is bounded (Farkas)
        probe = LinearProgram(dual_lp.c, AD, (EQ,) * n, np.zeros(n), lower, upper)
        prep = _solve_primal(probe, max_iter=max_iter)
        status = LPStatus.INFEASIBLE if prep.status is LPStatus.UNBOUNDED else LPStatus.UNBOUNDED
        return _report(lp, status, np.full(n, np.nan), rep.iterations + prep.iterations,
                       None, None, "dual")
    if rep.status is not LPStatus.OPTIMAL:
        return _report(lp, rep.status, np.full(n, np.nan), rep.iterations, None, None, "dual")
    x = rep.duals.copy()
    # multipliers of the original rows in the d = c - A^T y convention
    codes = np.array([_REL_CODE[r] for r in lp.relations], dtype=int)
    yv = rep.solution
    y = np.zeros(lp.n_rows)
    pos = 0
    for code in (-1, 1):
        idx = np.flatnonzero(codes == code)
        y[idx] = code * yv[pos:pos + idx.size]
        pos += idx.size
    idx = np.flatnonzero(codes == 0)
    y[idx] = -yv[kg:kg + idx.size]
    return _report(lp, LPStatus.OPTIMAL, x, rep.iterations, y, None, "dual")


def solve_lp(lp, warm_start=None, dualize="auto", max_iter=None):
    """Solve a LinearProgram and return a SolveReport.

    ``dualize='auto'`` solves tall programs (many more rows than variables)
    through their dual, which has one row per variable. Warm starts apply to
    the primal route only and are ignored when the constraints differ.
    """
    if not isinstance(lp, LinearProgram):
        raise StructuralError("solve_lp expects a LinearProgram")
    if dualize == "auto":
        n_bound_rows = int(np.sum(np.isfinite(lp.lower)) + np.sum(np.isfinite(lp.upper)))
        dualize = lp.n_rows > 4 * lp.n_vars + 8 and n_bound_rows <= 2 * lp.n_vars
    if dualize and warm_start is None:
        return _solve_dual(lp, max_iter)
    return _solve_primal(lp, warm_start, max_iter)


def require_optimal(rep, what="linear program"):
    if rep.status is not LPStatus.OPTIMAL:
        raise SolverError(f"{what}: solver returned {rep.status.value}", report=rep)
    return rep


# ---------------------------------------------------------------- least squares

def least_squares(A, b, weights=None, rtol=1e-10):
    """Weighted least squares via pivoted QR.

    Minimizes sum_i weights_i (b - A z)_i^2. Raises RankError naming the
    columns that the pivoted factorization found dependent.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    if A.shape[0] != b.shape[0]:
        raise StructuralError("A and b have incompatible shapes")
    if weights is None:
        sw = np.ones(A.shape[0])
    else:
        w = np.asarray(weights, dtype=float).ravel()
        if w.size != A.shape[0] or np.any(w <= 0):
            raise StructuralError("weights must be positive, one per row")
        sw = np.sqrt(w)
    Aw = A * sw[:, None]
    bw = b * (sw if b.ndim == 1 else sw[:, None])
    n = A.shape[1]
    if n == 0:
        return np.zeros((0,) + b.shape[1:])
    Q, R, piv = scipy.linalg.qr(Aw, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > rtol * diag[0])) if diag.size and diag[0] > 0 else 0
    if rank < n or A.shape[0] < n:
        bad = sorted(int(c) for c in piv[rank:])
        raise RankError(f"matrix is rank deficient; dependent columns {bad}", bad)
    z = scipy.linalg.solve_triangular(R, Q.T @ bw)
    out = np.empty_like(z)
    out[piv] = z
    return out


# ---------------------------------------------------------------- p-norm fits

@dataclass
class PnormInfo:
    objective: float
    iterations: int
    converged: bool
    trace: list
    gradient_norm: float


def _pnorm_obj(r, p, w):
    return float(w @ np.abs(r) ** p)


def minimize_pnorm(A, b, p, weights=None, tol=1e-9, max_iter=500, full_output=False, x0=None):
    """Minimize the weighted p-norm of b - A z over z for 1 < p < inf.

    Iteratively reweighted least squares used as a damped Newton method with
    backtracking, so the objective never increases. Returns z, or (z, info)
    with ``full_output``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    p = float(p)
    if not (1.0 < p < np.inf):
        raise StructuralError("minimize_pnorm needs 1 < p < inf")
    N, n = A.shape
    w = np.ones(N) if weights is None else np.asarray(weights, dtype=float).ravel()
    if n == 0:
        info = PnormInfo(_pnorm_obj(b, p, w) ** (1 / p), 0, True, [], 0.0)
        return (np.zeros(0), info) if full_output else np.zeros(0)
    z = least_squares(A, b, w) if x0 is None else np.asarray(x0, dtype=float).copy()
    r = b - A @ z
    F = _pnorm_obj(r, p, w)
    trace = [F]
    bscale = max(float(np.max(np.abs(b))), 1e-300)
    converged = False
    quiet = False
    it = 0
    for it in range(1, max_iter + 1):
        if F <= 1e-300:
            converged = True
            break
        absr = np.abs(r)
        floor = 1e-10 * max(float(absr.max()), 1e-12 * bscale)
        q = w * np.maximum(absr, floor) ** (p - 2.0)
        try:
            z_ls = least_squares(A, b, q)
        except RankError:
            z_ls = np.linalg.lstsq(A * np.sqrt(q)[:, None], b * np.sqrt(q), rcond=None)[0]
        step = z_ls - z
        if p > 2.0:
            # the reweighted step is (p - 1) times the Newton step; take the Newton step
            step /= p - 1.0
        g = -p * (A.T @ (w * absr ** (p - 1.0) * np.sign(r)))
        slope = float(g @ step)
        t = 1.0
        accepted = False
        for _ in range(60):
            zt = z + t * step
            rt = b - A @ zt
            Ft = _pnorm_obj(rt, p, w)
            if Ft <= F + 1e-4 * t * min(slope, 0.0):
                accepted = True
                break
            t *= 0.5
        if not accepted or Ft > F:
            converged = True
            break
        rel = (F - Ft) / max(F, 1e-300)
        small_step = t * np.linalg.norm(step) <= 1e-10 * (1.0 + np.linalg.norm(z))
        z, r, F = zt, rt, Ft
        trace.append(F)
        # stop on a small relative decrease confirmed twice or by a tiny step
        if rel <= tol and (small_step or quiet):
            converged = True
            break
        quiet = rel <= tol
    grad = p * (A.T @ (w * np.abs(r) ** (p - 1.0) * np.sign(r)))
    gnorm = float(np.linalg.norm(grad) / max(p * F, 1e-300))
    info = PnormInfo(F ** (1.0 / p), it, converged, trace, gnorm)
    if not converged:
        raise ConvergenceError(f"p-norm minimization did not converge in {max_iter} iterations",
                               gap=gnorm, trace=trace)
    return (z, info) if full_output else z


# ---------------------------------------------------------------- least distance

def least_distance(G, h):
    """Minimum Euclidean norm x with G x >= h, via nonnegative least squares.

    Returns None when the system is infeasible.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    h = np.asarray(h, dtype=float).ravel()
    k, n = G.shape
    if k == 0:
        return np.zeros(n)
    E = np.vstack([G.T, h[None, :]])
    f = np.zeros(n + 1)
    f[n] = 1.0
    u, _ = nnls(E, f, maxiter=50 * (n + k + 1))
    r = E @ u - f
    if np.linalg.norm(r) < 1e-12:
        return None
    return -r[:n] / r[n]


def min_norm_point(A_ub=None, b_ub=None, A_eq=None, b_eq=None, n=None, center=None, feas_tol=1e-9):
    """Point of a polyhedron closest to ``center`` (default origin) in the Euclidean norm.

    Equalities are eliminated through a null-space parametrization and the
    remaining inequalities are handed to ``least_distance``. Returns None when
    the polyhedron is empty or the result misses it by more than ``feas_tol``
    (relative), which happens when NNLS stalls on very thin polyhedra.
    """
    if n is None:
        n = (A_ub if A_ub is not None else A_eq).shape[1]
    c0 = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    if A_eq is not None and np.size(A_eq):
        A_eq = np.atleast_2d(A_eq)
        x0 = np.linalg.lstsq(A_eq, b_eq - A_eq @ c0, rcond=None)[0]
        B = scipy.linalg.null_space(A_eq, rcond=1e-12)
    else:
        x0 = np.zeros(n)
        B = np.eye(n)
    if A_ub is None or not np.size(A_ub):
        return c0 + x0
    A_ub = np.atleast_2d(A_ub)
    # A_ub (c0 + x0 + B t) <= b_ub  <=>  -A_ub B t >= A_ub (c0 + x0) - b_ub
    G = -A_ub @ B
    h = A_ub @ (c0 + x0) - b_ub
    t = least_distance(G, h)
    if t is None:
        return None
    x = c0 + x0 + B @ t
    scale = 1.0 + float(np.max(np.abs(b_ub), initial=0.0))
    if np.max(A_ub @ x - b_ub, initial=0.0) > feas_tol * scale:
        return None
    return x
