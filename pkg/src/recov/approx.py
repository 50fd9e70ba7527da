"""Near-best approximation maps onto Z = M(V) in the M-norm."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import StandingAssumptionError, StructuralError
from .measure import coset_minimizer, m_norm, MeasureKind
from .solvers import (LinearProgram, least_squares, min_norm_point, minimize_pnorm,
                      require_optimal, solve_lp)
from .spaces import Element, NormKind

# relative slack allowed on the optimal value during the least-norm tie-break
TIE_BREAK_SLACK = 1e-9
PNORM_TOL = 1e-9


class ApproxMethod(Enum):
    MINIMAX_LP = "MINIMAX_LP"
    LEAST_SQUARES = "LEAST_SQUARES"
    PNORM = "PNORM"


def standing_assumption_witness(M, V, rtol=1e-10):
    """Nonzero v in V with M v = 0, or None when N and V meet only at 0."""
    Z = M.rows @ V.basis
    n = V.dim
    if n == 0:
        return None
    if n > M.m:
        c = scipy.linalg.null_space(Z)[:, 0]
        return V.basis @ c
    U, s, Vt = np.linalg.svd(Z, full_matrices=False)
    scale = np.linalg.norm(V.basis, 2)
    if s[-1] <= rtol * max(s[0], 1e-300) or s[-1] <= 1e-13 * scale:
        return V.basis @ Vt[-1]
    return None


def check_standing_assumption(M, V):
    wit = standing_assumption_witness(M, V)
    if wit is not None:
        raise StandingAssumptionError(
            "the model space meets the null space of M; recovery radius is infinite", witness=wit)


@dataclass
class ApproxMap:
    """Near-best map Lambda: w -> z in Z = M(V) with ||w - z||_M <= lam * E(w)."""

    M: object
    V: object
    method: ApproxMethod = None
    lam: float = None

    def __post_init__(self):
        if self.V.space.N != self.M.space.N:
            raise StructuralError("V and M live on different spaces")
        sp = self.M.space
        if self.method is None:
            self.method = default_method(self.M)
        self.method = ApproxMethod(self.method)
        polyhedral = sp.kind is NormKind.SUP or (sp.kind is NormKind.LP and sp.p == 1.0)
        hilbert = sp.kind is NormKind.HILBERT or (sp.kind is NormKind.LP and sp.p == 2.0)
        if self.method is ApproxMethod.MINIMAX_LP and not polyhedral:
            raise StructuralError("MINIMAX_LP needs a SUP or L1 ambient")
        if self.method is ApproxMethod.LEAST_SQUARES and not hilbert:
            raise StructuralError("LEAST_SQUARES needs a HILBERT ambient")
        if self.method is ApproxMethod.PNORM and not (sp.kind is NormKind.LP and 1 < sp.p < np.inf):
            raise StructuralError("PNORM needs an LP(p) ambient with 1 < p < inf")
        if self.lam is None:
            self.lam = {ApproxMethod.LEAST_SQUARES: 1.0,
                        ApproxMethod.MINIMAX_LP: 1.0 + TIE_BREAK_SLACK,
                        ApproxMethod.PNORM: 1.0 + PNORM_TOL}[self.method]
        if self.lam < 1.0:
            raise StructuralError("near-best constant must be at least 1")
        check_standing_assumption(self.M, self.V)
        self.Z = self.M.rows @ self.V.basis
        self.condition = float(np.linalg.cond(self.Z))


def default_method(M):
    sp = M.space
    if sp.kind is NormKind.HILBERT or (sp.kind is NormKind.LP and sp.p == 2.0):
        return ApproxMethod.LEAST_SQUARES
    if sp.kind is NormKind.SUP or sp.p == 1.0:
        return ApproxMethod.MINIMAX_LP
    return ApproxMethod.PNORM


@dataclass
class ApproxResult:
    z: np.ndarray
    c: np.ndarray
    residual_norm: float
    best_error: float
    lam: float
    warnings: list = field(default_factory=list)


def _exact_in_Z(Lam, w):
    """Coefficients c with Z c = w when w lies in Z (to roundoff), else None."""
    c = np.linalg.lstsq(Lam.Z, w, rcond=None)[0]
    if np.max(np.abs(Lam.Z @ c - w), initial=0.0) <= 1e-12 * max(1.0, float(np.max(np.abs(w)))):
        return c
    return None


def _cube_minimax(Z, w):
    """min_c max_j |w - Z c|_j, then the least-norm c within the slack."""
    m, n = Z.shape
    A = np.vstack([np.hstack([-Z, -np.ones((m, 1))]), np.hstack([Z, -np.ones((m, 1))])])
    b = np.concatenate([-w, w])
    cost = np.zeros(n + 1)
    cost[-1] = 1.0
    lp = LinearProgram.from_parts(cost, A_ub=A, b_ub=b, lower=-np.inf, upper=np.inf)
    rep = require_optimal(solve_lp(lp), "minimax fit")
    s = max(rep.objective_value, 0.0)
    s_cap = s * (1.0 + TIE_BREAK_SLACK) + 1e-15 * max(1.0, float(np.max(np.abs(w))))
    c = min_norm_point(A_ub=np.vstack([-Z, Z]), b_ub=np.concatenate([s_cap - w, s_cap + w]), n=n)
    if c is None:
        c = rep.solution[:n]
    return c, s


def _general_best(M, Z, w):
    """Exact best approximation for a general M: returns (c, E)."""
    sp = M.space
    R = M.rows
    m, N = R.shape
    n = Z.shape[1]
    if sp.kind is NormKind.SUP:
        # max s  s.t.  R x' + Z c' - s w = 0,  |x'| <= 1 ; E = 1/s, c = c'/s
        cost = np.zeros(N + n + 1)
        cost[-1] = -1.0
        A = np.hstack([R, Z, -w[:, None]])
        lo = np.concatenate([-np.ones(N), np.full(n, -np.inf), [0.0]])
        hi = np.concatenate([np.ones(N), np.full(n, np.inf), [np.inf]])
        lp = LinearProgram(cost, A, ("=",) * m, np.zeros(m), lo, hi)
        rep = solve_lp(lp, dualize=False)
        if rep.status.value == "UNBOUNDED":
            return None, 0.0
        require_optimal(rep, "best approximation")
        s = rep.solution[-1]
        return rep.solution[N:N + n] / s, 1.0 / s
    if sp.p == 1.0:
        wt = sp.weights
        cost = np.concatenate([wt, wt, np.zeros(n)])
        A = np.hstack([R, -R, Z])
        lo = np.concatenate([np.zeros(2 * N), np.full(n, -np.inf)])
        lp = LinearProgram(cost, A, ("=",) * m, w, lo, np.inf)
        rep = require_optimal(solve_lp(lp, dualize=False), "best approximation")
        return rep.solution[2 * N:], rep.objective_value
    # LP(p): E(w) = dist(x_w, V + N) for any x_w in the coset
    x_w = np.linalg.lstsq(R, w, rcond=None)[0]
    B = np.hstack([M.nullspace_basis, np.linalg.pinv(R) @ Z])
    t, info = minimize_pnorm(B, x_w, sp.p, sp.weights, full_output=True)
    c = t[-n:] if n else np.zeros(0)
    # x_w - (null part) - R^+ Z c is a coset element of w - Z c
    return c, info.objective


def approximate(Lam, w):
    """Return an ApproxResult with z = Z c near-best for w in the M-norm."""
    M, Z = Lam.M, Lam.Z
    w = np.asarray(w, dtype=float).ravel()
    if w.size != M.m:
        raise StructuralError(f"measurement vector has length {w.size}, expected {M.m}")
    warnings = []
    if Lam.condition > 1e8:
        warnings.append(f"M restricted to V is ill-conditioned (cond {Lam.condition:.3g})")
    c = _exact_in_Z(Lam, w)
    if c is not None:
        return ApproxResult(w.copy(), c, 0.0, 0.0, Lam.lam, warnings)
    sp = M.space
    if Lam.method is ApproxMethod.LEAST_SQUARES:
        Q, G, sw = M._whitened_qr
        Gi = scipy.linalg.solve_triangular(G, np.column_stack([Z, w]), trans="T")
        c = least_squares(Gi[:, :-1], Gi[:, -1])
        z = Z @ c
        err = float(np.linalg.norm(Gi[:, -1] - Gi[:, :-1] @ c))
        return ApproxResult(z, c, err, err, Lam.lam, warnings)
    if Lam.method is ApproxMethod.MINIMAX_LP and M.is_cube:
        c, best = _cube_minimax(Z, w)
        z = Z @ c
        return ApproxResult(z, c, float(np.max(np.abs(w - z))), best, Lam.lam, warnings)
    if Lam.method is ApproxMethod.PNORM and M.kind is MeasureKind.DISJOINT_AVG:
        c, info = minimize_pnorm(Z, w, sp.p, full_output=True)
        z = Z @ c
        return ApproxResult(z, c, m_norm(M, w - z), info.objective, Lam.lam, warnings)
    c, best = _general_best(M, Z, w)
    if c is None:
        c = np.linalg.lstsq(Z, w, rcond=None)[0]
        return ApproxResult(w.copy(), c, 0.0, 0.0, Lam.lam, warnings)
    z = Z @ c
    return ApproxResult(z, c, m_norm(M, w - z), best, Lam.lam, warnings)


def approx_error_E(Lam, w):
    """E(w) = min over z in Z of ||w - z||_M, by the exact method for the ambient."""
    M, Z = Lam.M, Lam.Z
    w = np.asarray(w, dtype=float).ravel()
    if _exact_in_Z(Lam, w) is not None:
        return 0.0
    sp = M.space
    if sp.kind is NormKind.HILBERT or (sp.kind is NormKind.LP and sp.p == 2.0):
        return approximate(Lam, w).best_error
    if M.is_cube:
        return _cube_minimax(Z, w)[1]
    if sp.kind is NormKind.LP and sp.p > 1.0 and M.kind is MeasureKind.DISJOINT_AVG:
        _, info = minimize_pnorm(Z, w, sp.p, full_output=True)
        return info.objective
    return _general_best(M, Z, w)[1]
