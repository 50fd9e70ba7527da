"""Measurement operators, the induced M-norm and its dual, and the net designer."""

import functools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from . import kernels
from .errors import PreconditionError, SolverError, StructuralError
from .solvers import (LinearProgram, LPStatus, least_squares, minimize_pnorm,
                      require_optimal, solve_lp)
from .spaces import Element, NormKind, Space, dual_norm, norm, values_of


class MeasureKind(Enum):
    POINT_EVAL = "POINT_EVAL"
    DISJOINT_AVG = "DISJOINT_AVG"
    RADEMACHER = "RADEMACHER"
    FOURIER = "FOURIER"
    GENERAL = "GENERAL"


class MeasurementOperator:
    """m linearly independent functionals on a Space.

    ``rows`` holds the effective row matrix R (m x N): l_j(x) = R[j] . x, with
    quadrature weights already folded in for integral functionals. Use
    ``make_measurements`` for the structured kinds.
    """

    def __init__(self, space, rows, kind=MeasureKind.GENERAL, params=None):
        R = np.atleast_2d(np.array(rows, dtype=float))
        if R.shape[1] != space.N:
            raise StructuralError(f"rows have length {R.shape[1]}, space has {space.N} nodes")
        if R.shape[0] > space.N:
            raise StructuralError("more functionals than grid nodes")
        if not np.all(np.isfinite(R)):
            raise StructuralError("functional rows must be finite")
        if R.shape[0]:
            s = np.linalg.svd(R, compute_uv=False)
            if s[-1] <= 1e-10 * s[0]:
                raise StructuralError("functionals are linearly dependent")
        R.setflags(write=False)
        self.space = space
        self.rows = R
        self.kind = MeasureKind(kind)
        self.params = dict(params or {})

    @property
    def m(self):
        return self.rows.shape[0]

    @property
    def N(self):
        return self.space.N

    @functools.cached_property
    def nullspace_basis(self):
        """Orthonormal (Euclidean) basis of ker R, N x (N - m). Computed on first use."""
        B = scipy.linalg.null_space(self.rows, rcond=1e-10)
        B.setflags(write=False)
        return B

    @functools.cached_property
    def _whitened_qr(self):
        # in whitened coordinates x~ = sqrt(w) x the rows become R / sqrt(w)
        sw = np.sqrt(self.space.weights)
        Rt = self.rows / sw[None, :]
        Q, G = np.linalg.qr(Rt.T)
        return Q, G, sw

    @property
    def is_cube(self):
        """True when the M-norm unit ball is the cube max_j |w_j| <= 1."""
        sp = self.space
        if self.kind is MeasureKind.POINT_EVAL and sp.kind is NormKind.SUP:
            return True
        if self.kind is MeasureKind.RADEMACHER and sp.kind is NormKind.LP and sp.p == 1.0:
            return True
        if self.kind is MeasureKind.DISJOINT_AVG and sp.kind is NormKind.SUP:
            return True
        return False

    def extend(self, other_rows, kind=None, params=None):
        """Operator with ``other_rows`` appended (nested schedules)."""
        return MeasurementOperator(self.space, np.vstack([self.rows, other_rows]),
                                   kind or self.kind, params or self.params)

    def to_csv(self):
        lines = ["j," + ",".join(f"x{i}" for i in range(self.N))]
        for j, r in enumerate(self.rows):
            lines.append(f"{j}," + ",".join(f"{v:.12g}" for v in r))
        return "\n".join(lines) + "\n"


def apply(M, x):
    return M.rows @ values_of(M.space, x)


# ---------------------------------------------------------------- factories

def _point_indices(space, params):
    if "indices" in params:
        idx = np.asarray(params["indices"], dtype=int)
    else:
        pts = np.asarray(params["points"], dtype=float)
        idx = np.searchsorted(space.nodes, pts)
        idx = np.clip(idx, 0, space.N - 1)
        left = np.clip(idx - 1, 0, space.N - 1)
        closer = np.abs(space.nodes[left] - pts) < np.abs(space.nodes[idx] - pts)
        idx = np.where(closer, left, idx)
        tol = 1e-9 * max(1.0, float(np.max(np.abs(space.nodes))))
        if np.any(np.abs(space.nodes[idx] - pts) > tol):
            raise PreconditionError("point evaluations must sit on grid nodes")
    if np.any(idx < 0) or np.any(idx >= space.N):
        raise StructuralError("point index out of range")
    if len(set(idx.tolist())) != idx.size:
        raise StructuralError("repeated evaluation points")
    return idx


def equispaced_indices(space, m, offset=0):
    """m node indices spaced N/m apart (N must be divisible by m)."""
    if space.N % m:
        raise PreconditionError(f"grid size {space.N} is not a multiple of {m}")
    return offset + np.arange(m) * (space.N // m)


def rademacher_signs(space, m):
    """Sign table r_j(t_i) = sgn(sin(2^(j+1) pi t)) for j = 1..m on a dyadic grid."""
    if space.domain is None:
        raise PreconditionError("RADEMACHER needs an interval domain")
    a, b = space.domain
    N = space.N
    cells = 2 ** (m + 1)
    if N % cells or not np.allclose(space.weights, (b - a) / N, rtol=1e-12, atol=0):
        raise PreconditionError(f"RADEMACHER({m}) needs a uniform grid with a multiple of {cells} cells")
    u = (space.nodes - a) / (b - a)
    h = 1.0 / N
    if not np.allclose(u, (np.arange(N) + 0.5) * h, rtol=0, atol=1e-12):
        raise PreconditionError("RADEMACHER needs midpoint nodes on the dyadic grid")
    # cell i lies in dyadic interval floor(i * 2^(j+1) / N); sign alternates starting at +
    i = np.arange(N)
    S = np.empty((m, N), dtype=np.int8)
    for j in range(1, m + 1):
        half = (i * 2 ** (j + 1)) // N
        S[j - 1] = np.where(half % 2 == 0, 1, -1)
    return S


def make_measurements(kind, params, space):
    """Build POINT_EVAL, DISJOINT_AVG, RADEMACHER, FOURIER or GENERAL operators.

    params:
      POINT_EVAL: {'indices': [...]} or {'points': [...]} or {'m': k} (equispaced)
      DISJOINT_AVG: {'supports': [[i, ...], ...]} or {'m': k} (k equal blocks)
      RADEMACHER: {'m': k}
      FOURIER: {'m': k}
      GENERAL: {'rows': matrix}
    """
    kind = MeasureKind(kind if not isinstance(kind, str) else kind.upper())
    params = dict(params or {})
    N = space.N
    if kind is MeasureKind.POINT_EVAL:
        if "m" in params and "indices" not in params and "points" not in params:
            params["indices"] = equispaced_indices(space, int(params["m"])).tolist()
        idx = _point_indices(space, params)
        R = np.zeros((idx.size, N))
        R[np.arange(idx.size), idx] = 1.0
        return MeasurementOperator(space, R, kind, {"indices": idx.tolist()})
    if kind is MeasureKind.DISJOINT_AVG:
        if "supports" in params:
            supports = [np.asarray(s, dtype=int) for s in params["supports"]]
        else:
            k = int(params["m"])
            if N % k:
                raise PreconditionError(f"grid size {N} is not a multiple of {k}")
            supports = [np.arange(j * (N // k), (j + 1) * (N // k)) for j in range(k)]
        seen = np.zeros(N, dtype=bool)
        R = np.zeros((len(supports), N))
        for j, s in enumerate(supports):
            if s.size == 0 or np.any(seen[s]):
                raise StructuralError("DISJOINT_AVG supports must be nonempty and disjoint")
            seen[s] = True
            R[j, s] = space.weights[s]
            R[j] /= dual_norm(space, R[j])
        return MeasurementOperator(space, R, kind, {"supports": [s.tolist() for s in supports]})
    if kind is MeasureKind.RADEMACHER:
        m = int(params["m"])
        S = rademacher_signs(space, m)
        R = S * space.weights[None, :]
        return MeasurementOperator(space, R, kind, {"m": m})
    if kind is MeasureKind.FOURIER:
        m = int(params["m"])
        if space.kind is not NormKind.HILBERT:
            raise PreconditionError("FOURIER measurements live in a HILBERT space")
        t = space.nodes
        cols = [np.ones_like(t)]
        k = 1
        while len(cols) < m:
            cols.append(np.cos(k * t))
            if len(cols) < m:
                cols.append(np.sin(k * t))
            k += 1
        R = np.array(cols[:m]) * space.weights[None, :] / (2.0 * np.pi)
        return MeasurementOperator(space, R, kind, {"m": m})
    R = np.asarray(params["rows"], dtype=float)
    return MeasurementOperator(space, R, MeasureKind.GENERAL, {})


# ---------------------------------------------------------------- M-norm

def _closed_form(M, w):
    if M.is_cube:
        return float(np.max(np.abs(w))) if w.size else 0.0
    if M.kind is MeasureKind.DISJOINT_AVG:
        p = M.space.p
        return float(np.sum(np.abs(w) ** p) ** (1.0 / p))
    return None


def coset_minimizer(M, w):
    """Minimal-norm element of the coset {x : M x = w} by optimization.

    Returns (value, x). SUP uses a homogenized LP with m rows, L1 a split LP,
    HILBERT the least-norm solution, LP(p) a p-norm fit over the null space.
    """
    sp = M.space
    w = np.asarray(w, dtype=float)
    R = M.rows
    N = sp.N
    if not np.any(w):
        return 0.0, np.zeros(N)
    if sp.kind is NormKind.HILBERT or (sp.kind is NormKind.LP and sp.p == 2.0):
        Q, G, sw = M._whitened_qr
        xt = Q @ scipy.linalg.solve_triangular(G, w, trans="T")
        x = xt / sw
        return norm(sp, x), x
    if sp.kind is NormKind.SUP:
        # max s  s.t.  R x' - s w = 0,  -1 <= x' <= 1,  s >= 0 ; then x = x'/s
        cost = np.zeros(N + 1)
        cost[-1] = -1.0
        A = np.hstack([R, -w[:, None]])
        lo = np.concatenate([-np.ones(N), [0.0]])
        hi = np.concatenate([np.ones(N), [np.inf]])
        lp = LinearProgram(cost, A, ("=",) * M.m, np.zeros(M.m), lo, hi)
        rep = require_optimal(solve_lp(lp, dualize=False), "M-norm")
        s = rep.solution[-1]
        x = rep.solution[:N] / s
        return 1.0 / s, x
    if sp.p == 1.0:
        wt = sp.weights
        cost = np.concatenate([wt, wt])
        lp = LinearProgram(cost, np.hstack([R, -R]), ("=",) * M.m, w, 0.0, np.inf)
        rep = require_optimal(solve_lp(lp, dualize=False), "M-norm")
        x = rep.solution[:N] - rep.solution[N:]
        return norm(sp, x), x
    x0 = np.linalg.lstsq(R, w, rcond=None)[0]
    B = M.nullspace_basis
    t = minimize_pnorm(-B, x0, sp.p, sp.weights)
    x = x0 + B @ t
    return norm(sp, x), x


def m_norm(M, w, check=False):
    """The quotient norm inf{norm(x) : M x = w}.

    Closed forms are used when the kind certifies the structure; ``check``
    cross-checks them against the optimization route.
    """
    w = np.asarray(w, dtype=float).ravel()
    if w.size != M.m:
        raise StructuralError(f"measurement vector has length {w.size}, expected {M.m}")
    val = _closed_form(M, w)
    if val is None:
        return coset_minimizer(M, w)[0]
    if check:
        opt = coset_minimizer(M, w)[0]
        if abs(opt - val) > 1e-8 * max(1.0, val):
            raise SolverError(f"closed-form M-norm {val} disagrees with optimization {opt}")
    return val


def m_dual_norm(M, alpha):
    """Norm of sum_j alpha_j l_j in the dual of the ambient space."""
    alpha = np.asarray(alpha, dtype=float).ravel()
    if alpha.size != M.m:
        raise StructuralError("coefficient vector has the wrong length")
    return dual_norm(M.space, M.rows.T @ alpha)


def m_norm_dual_program(M, w):
    """sup{alpha . w : m_dual_norm(alpha) <= 1}, solved on the dual side.

    Returns (value, maximizing alpha). Independent of ``coset_minimizer``.
    """
    sp = M.space
    w = np.asarray(w, dtype=float).ravel()
    m, N = M.m, M.N
    R = M.rows
    if not np.any(w):
        return 0.0, np.zeros(m)
    if sp.kind is NormKind.HILBERT or (sp.kind is NormKind.LP and sp.p == 2.0):
        G = (R / sp.weights[None, :]) @ R.T
        cf = scipy.linalg.cho_factor(G)
        a = scipy.linalg.cho_solve(cf, w)
        val = float(np.sqrt(w @ a))
        return val, a / val
    if sp.kind is NormKind.SUP:
        # min sum u  s.t.  -u <= R^T a <= u,  a . w = 1 ; value = 1 / min
        cost = np.concatenate([np.zeros(m), np.ones(N)])
        A = np.vstack([np.hstack([R.T, -np.eye(N)]), np.hstack([-R.T, -np.eye(N)]),
                       np.concatenate([w, np.zeros(N)])[None, :]])
        b = np.concatenate([np.zeros(2 * N), [1.0]])
        rel = ("<=",) * (2 * N) + ("=",)
        lo = np.concatenate([np.full(m, -np.inf), np.zeros(N)])
        lp = LinearProgram(cost, A, rel, b, lo, np.inf)
        rep = require_optimal(solve_lp(lp), "dual M-norm program")
        a = rep.solution[:m]
        val = 1.0 / rep.objective_value
        return val, a * val
    if sp.p == 1.0:
        # max a . w  s.t.  |R^T a| <= weights
        A = np.vstack([R.T, -R.T])
        b = np.concatenate([sp.weights, sp.weights])
        lp = LinearProgram.from_parts(-w, A_ub=A, b_ub=b, lower=-np.inf, upper=np.inf)
        rep = require_optimal(solve_lp(lp), "dual M-norm program")
        return -rep.objective_value, rep.solution
    # a = w/|w|^2 + P t ; minimize the dual norm of R^T a raised to q
    q = sp.dual_exponent
    P = scipy.linalg.null_space(w[None, :])
    a0 = w / (w @ w)
    wq = sp.weights ** (1.0 - q)
    t = minimize_pnorm(-(R.T @ P), R.T @ a0, q, wq)
    a = a0 + P @ t
    f = m_dual_norm(M, a)
    return 1.0 / f, a / f


# ---------------------------------------------------------------- net design

def fibonacci_directions(n, count):
    """Deterministic, roughly uniform unit vectors in R^n."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        th = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(th), np.sin(th)])
    if n == 3:
        i = np.arange(count) + 0.5
        z = 1 - 2 * i / count
        r = np.sqrt(1 - z * z)
        th = np.pi * (1 + 5 ** 0.5) * i
        return np.column_stack([r * np.cos(th), r * np.sin(th), z])
    # higher dimensions: deterministic normal samples from a fixed seed
    rng = np.random.default_rng(20240101 + n)
    X = rng.standard_normal((count, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


@dataclass
class NetDesign:
    operator: MeasurementOperator
    net_size: int
    achieved_delta: float
    candidates: int


def design_net_measurements(V, delta, max_size=4096, return_design=False):
    """POINT_EVAL operator from norming points of a greedy delta-net of the sphere of V."""
    sp = V.space
    if sp.kind is not NormKind.SUP:
        raise PreconditionError("the net designer works in a SUP ambient")
    if not (0.0 < delta < 1.0):
        raise PreconditionError("delta must lie in (0, 1)")
    n = V.dim
    count = max(64 * n * n, 2)
    C = fibonacci_directions(n, count)
    P = C @ V.basis.T
    P = P / np.max(np.abs(P), axis=1, keepdims=True)
    P = np.ascontiguousarray(P)
    chosen, radius = kernels.greedy_cover(P, float(delta), int(max_size))
    if radius > delta:
        raise PreconditionError(
            f"net size cap {max_size} reached with achieved delta {radius:.6g}")
    idx = []
    for k in chosen:
        i = int(np.argmax(np.abs(P[k])))
        if i not in idx:
            idx.append(i)
    idx = sorted(idx)
    M = make_measurements(MeasureKind.POINT_EVAL, {"indices": idx}, sp)
    M.params["net_size"] = int(len(chosen))
    M.params["achieved_delta"] = float(radius)
    if return_design:
        return NetDesign(M, int(len(chosen)), float(radius), count)
    return M
