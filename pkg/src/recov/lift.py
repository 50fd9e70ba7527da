"""Liftings: right inverses of M that pick a representative of each coset."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from . import kernels
from .errors import PreconditionError, StructuralError
from .measure import MeasureKind, coset_minimizer, m_norm, rademacher_signs
from .spaces import Element, NormKind, norm

EXACT_VERTEX_MAX_M = 20


class LiftKind(Enum):
    DUAL_BASIS = "DUAL_BASIS"
    ORTHONORMAL = "ORTHONORMAL"
    MIN_NORM = "MIN_NORM"
    RIESZ_PRODUCT = "RIESZ_PRODUCT"


@dataclass
class Lifting:
    M: object
    kind: LiftKind
    Psi: np.ndarray = None
    norm_bound: float = 1.0
    label: str = ""
    _signs: np.ndarray = field(default=None, repr=False)

    @property
    def linear(self):
        return self.kind in (LiftKind.DUAL_BASIS, LiftKind.ORTHONORMAL) or (
            self.kind is LiftKind.MIN_NORM and self.M.space.kind is NormKind.HILBERT)

    def matrix(self):
        """N x m matrix of a linear lifting."""
        if self.Psi is None:
            raise StructuralError(f"{self.kind.value} lifting has no matrix form")
        return self.Psi


# ---------------------------------------------------------------- constructors

def _disjoint_psi(M):
    sp = M.space
    R = M.rows
    if M.kind is MeasureKind.POINT_EVAL:
        Psi = np.zeros((M.N, M.m))
        Psi[M.params["indices"], np.arange(M.m)] = 1.0
        return Psi
    if M.kind is MeasureKind.DISJOINT_AVG:
        Psi = np.zeros((M.N, M.m))
        for j, s in enumerate(M.params["supports"]):
            s = np.asarray(s)
            g = R[j, s] / sp.weights[s]
            if sp.kind is NormKind.SUP or sp.p == 1.0 or np.allclose(g, g[0]):
                # constant row on its support: the Hoelder-extremal psi is constant too
                Psi[s, j] = 1.0 / R[j, s].sum()
            else:
                q = sp.dual_exponent
                h = np.sign(g) * np.abs(g) ** (q - 1.0)
                Psi[s, j] = h / (R[j, s] @ h)
        return Psi
    return None


def _cell_psi(M):
    """Dual basis supported on m grid cells chosen by pivoted QR of the rows."""
    R = M.rows
    _, _, piv = scipy.linalg.qr(R, pivoting=True, mode="economic")
    cells = np.sort(piv[:M.m])
    Psi = np.zeros((M.N, M.m))
    Psi[cells, :] = np.linalg.inv(R[:, cells])
    return Psi


def dual_basis_lifting(M, Psi=None, mode="auto"):
    """Linear lifting w -> sum_j w_j psi_j with l_i(psi_j) = delta_ij.

    mode 'auto' uses disjoint unit-norm psi_j for POINT_EVAL and DISJOINT_AVG
    and cell-supported psi_j otherwise; 'cells' forces the latter;
    'rademacher' uses psi_j = r_j (RADEMACHER only).
    """
    if Psi is None:
        if mode == "rademacher":
            if M.kind is not MeasureKind.RADEMACHER:
                raise PreconditionError("psi_j = r_j needs RADEMACHER measurements")
            a, b = M.space.domain
            Psi = rademacher_signs(M.space, M.m).T.astype(float) / (b - a)
        elif mode in ("auto", "disjoint"):
            Psi = _disjoint_psi(M)
            if Psi is None:
                if mode == "disjoint":
                    raise PreconditionError("disjoint dual basis needs POINT_EVAL or DISJOINT_AVG")
                Psi = _cell_psi(M)
        elif mode == "cells":
            Psi = _cell_psi(M)
        else:
            raise StructuralError(f"unknown dual basis mode {mode!r}")
    Psi = np.asarray(Psi, dtype=float)
    if Psi.shape != (M.N, M.m):
        raise StructuralError("dual basis must be N x m")
    err = np.max(np.abs(M.rows @ Psi - np.eye(M.m)), initial=0.0)
    if err > 1e-9:
        raise StructuralError(f"psi_j are not dual to the functionals (error {err:.3g})")
    Psi.setflags(write=False)
    lift = Lifting(M, LiftKind.DUAL_BASIS, Psi, np.nan, f"DUAL_BASIS({mode})")
    lo, hi = projection_norm(lift)
    lift.norm_bound = hi
    return lift


def orthonormal_lifting(M):
    """Least-norm lifting in a HILBERT space; equals sum_j w_j phi_j for orthonormal rows."""
    sp = M.space
    if not (sp.kind is NormKind.HILBERT or (sp.kind is NormKind.LP and sp.p == 2.0)):
        raise PreconditionError("ORTHONORMAL lifting needs a HILBERT ambient")
    Q, G, sw = M._whitened_qr
    Psi = (Q @ scipy.linalg.solve_triangular(G, np.eye(M.m), trans="T")) / sw[:, None]
    Psi.setflags(write=False)
    return Lifting(M, LiftKind.ORTHONORMAL, Psi, 1.0, "ORTHONORMAL")


def min_norm_lifting(M):
    sp = M.space
    if sp.kind is NormKind.SUP or (sp.kind is NormKind.LP and sp.p == 1.0):
        raise PreconditionError("MIN_NORM lifting needs a uniformly convex ambient (1 < p < inf)")
    if sp.kind is NormKind.HILBERT:
        lift = orthonormal_lifting(M)
        return Lifting(M, LiftKind.MIN_NORM, lift.Psi, 1.0, "MIN_NORM(2)")
    return Lifting(M, LiftKind.MIN_NORM, None, 1.0, f"MIN_NORM({sp.p:g})")


def riesz_lifting(M):
    if M.kind is not MeasureKind.RADEMACHER:
        raise PreconditionError("RIESZ_PRODUCT lifting needs RADEMACHER measurements")
    signs = np.ascontiguousarray(rademacher_signs(M.space, M.m))
    return Lifting(M, LiftKind.RIESZ_PRODUCT, None, 1.0, "RIESZ_PRODUCT", signs)


def make_lifting(M, kind, **kw):
    kind = LiftKind(kind if not isinstance(kind, str) else kind.upper())
    return {LiftKind.DUAL_BASIS: dual_basis_lifting, LiftKind.ORTHONORMAL: orthonormal_lifting,
            LiftKind.MIN_NORM: min_norm_lifting, LiftKind.RIESZ_PRODUCT: riesz_lifting}[kind](M, **kw)


# ---------------------------------------------------------------- evaluation

def lift_values(D, w):
    w = np.asarray(w, dtype=float).ravel()
    if w.size != D.M.m:
        raise StructuralError(f"measurement vector has length {w.size}, expected {D.M.m}")
    if D.Psi is not None:
        return D.Psi @ w
    if D.kind is LiftKind.RIESZ_PRODUCT:
        s = float(np.max(np.abs(w))) if w.size else 0.0
        if s == 0.0:
            return np.zeros(D.M.N)
        a, b = D.M.space.domain
        return s * kernels.riesz_product(D._signs, w / s) / (b - a)
    if D.kind is LiftKind.MIN_NORM:
        return coset_minimizer(D.M, w)[1]
    raise StructuralError(f"cannot evaluate {D.kind}")


def lift(D, w):
    return Element(D.M.space, lift_values(D, w))


def min_norm_coset_element(M, w, p=None):
    """Unique minimal-norm element of {x : M x = w} in LP(p), 1 < p < inf, or HILBERT."""
    sp = M.space
    if p is not None and float(p) != sp.p:
        raise PreconditionError(f"space has p = {sp.p}, requested p = {p}")
    if sp.kind is NormKind.SUP or sp.p == 1.0:
        raise PreconditionError("minimal-norm element is unique only for 1 < p < inf")
    return Element(sp, coset_minimizer(M, w)[1])


# ---------------------------------------------------------------- norms

@dataclass
class LiftingNorm:
    lower: float
    upper: float
    certified: bool
    mode: str
    witness: np.ndarray = None


def projection_norm(D):
    """Operator norm of the projection P = Psi R, which equals the lifting norm.

    Exact in SUP, L1 and HILBERT ambients; LP(p) gets Riesz-Thorin bracketing.
    """
    sp = D.M.space
    P = D.Psi @ D.M.rows
    w = sp.weights
    if sp.kind is NormKind.SUP:
        v = float(np.max(np.sum(np.abs(P), axis=1)))
        return v, v
    if sp.kind is NormKind.HILBERT or sp.p == 2.0:
        sw = np.sqrt(w)
        v = float(np.linalg.norm(sw[:, None] * P / sw[None, :], 2))
        return v, v
    n1 = float(np.max((w @ np.abs(P)) / w))
    if sp.p == 1.0:
        return n1, n1
    ninf = float(np.max(np.sum(np.abs(P), axis=1)))
    upper = n1 ** (1.0 / sp.p) * ninf ** (1.0 - 1.0 / sp.p)
    return 1.0, upper


def lifting_norm(D, mode="EXACT_VERTEX", samples=1000, seed=0):
    """Lifting norm sup ||Delta(w)|| / ||w||_M as a (lower, upper) bracket.

    EXACT_VERTEX walks the 2^(m-1) sign vectors of the cube unit ball (linear
    liftings, cube M-norm, m <= 20). PROJECTION uses the projection identity.
    MONTE_CARLO samples w and pairs the best ratio with ``norm_bound``.
    """
    mode = mode.upper()
    M = D.M
    sp = M.space
    if D.kind in (LiftKind.RIESZ_PRODUCT,) or (D.kind is LiftKind.MIN_NORM and D.Psi is None):
        # norm-one constructions: ||Delta(w)|| = ||w||_M for every w
        if mode == "EXACT_VERTEX" and M.m > EXACT_VERTEX_MAX_M:
            raise StructuralError(f"EXACT_VERTEX needs m <= {EXACT_VERTEX_MAX_M}")
        if mode != "MONTE_CARLO":
            return LiftingNorm(1.0, 1.0, True, mode)
    if mode == "EXACT_VERTEX":
        if M.m > EXACT_VERTEX_MAX_M:
            raise StructuralError(f"EXACT_VERTEX needs m <= {EXACT_VERTEX_MAX_M}, got {M.m}")
        if not M.is_cube:
            raise PreconditionError("EXACT_VERTEX needs a cube M-norm unit ball")
        Psi = np.ascontiguousarray(D.matrix())
        code = 0 if sp.kind is NormKind.SUP else 1
        val, idx = kernels.cube_vertex_max(Psi, np.ascontiguousarray(sp.weights), code,
                                           float(sp.p if code else 1.0))
        s = np.ones(M.m)
        s[1:] = 1.0 - 2.0 * ((idx >> np.arange(M.m - 1)) & 1)
        return LiftingNorm(val, val, True, mode, s)
    if mode == "PROJECTION":
        lo, hi = projection_norm(D)
        return LiftingNorm(lo, hi, lo == hi, mode)
    if mode == "MONTE_CARLO":
        rng = np.random.default_rng(seed)
        best, wit = 0.0, None
        for k in range(samples):
            w = rng.standard_normal(M.m) if k % 2 else rng.choice([-1.0, 1.0], M.m)
            r = norm(sp, lift_values(D, w)) / m_norm(M, w)
            if r > best:
                best, wit = r, w
        upper = D.norm_bound if np.isfinite(D.norm_bound) else np.inf
        return LiftingNorm(best, max(upper, best), False, mode, wit)
    raise StructuralError(f"unknown lifting norm mode {mode!r}")
