"""Recovery algorithm A(w) = M_V^{-1} Lambda(w) + Delta(w - Lambda(w)) and its certificates."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .angles import mu_N_V, mu_V_N
from .approx import ApproxMap, ApproxMethod, approximate, check_standing_assumption
from .errors import StructuralError
from .lift import LiftKind, lift_values, lifting_norm, make_lifting
from .measure import MeasureKind, apply
from .spaces import Element, NormKind, dist_to_subspace, norm


@dataclass
class RecoveryProblem:
    """Model class K(eps, V) observed through M. ``eps`` only enters certificates."""

    V: object
    M: object
    eps: float = None

    def __post_init__(self):
        if self.V.space is not self.M.space and self.V.space.N != self.M.space.N:
            raise StructuralError("V and M live on different spaces")
        if self.eps is not None and self.eps < 0:
            raise StructuralError("epsilon must be nonnegative")
        check_standing_assumption(self.M, self.V)

    @property
    def space(self):
        return self.M.space

    @cached_property
    def mu_N_V(self):
        return mu_N_V(self.M, self.V)

    @cached_property
    def mu_V_N(self):
        return mu_V_N(self.M, self.V)


def default_pipeline(P):
    """(ApproxMap, Lifting) matched to the ambient norm and measurement kind."""
    M = P.M
    sp = M.space
    if M.kind is MeasureKind.RADEMACHER and sp.kind is NormKind.LP and sp.p == 1.0:
        return ApproxMap(M, P.V, ApproxMethod.MINIMAX_LP), make_lifting(M, LiftKind.RIESZ_PRODUCT)
    if sp.kind is NormKind.HILBERT or sp.p == 2.0:
        return ApproxMap(M, P.V, ApproxMethod.LEAST_SQUARES), make_lifting(M, LiftKind.ORTHONORMAL)
    if sp.kind is NormKind.SUP or sp.p == 1.0:
        return ApproxMap(M, P.V, ApproxMethod.MINIMAX_LP), make_lifting(M, LiftKind.DUAL_BASIS)
    return ApproxMap(M, P.V, ApproxMethod.PNORM), make_lifting(M, LiftKind.DUAL_BASIS)


def lift_norm_value(D):
    """Best available upper bound on the lifting norm."""
    M = D.M
    if D.Psi is None or D.kind is not LiftKind.DUAL_BASIS:
        return float(D.norm_bound)
    if M.is_cube and M.m <= 20:
        return lifting_norm(D, "EXACT_VERTEX").upper
    return lifting_norm(D, "PROJECTION").upper


@dataclass
class RecoveryReport:
    reconstruction: Element
    v_component: Element
    data_residual: float
    model_distance: float
    E: float
    lam: float
    lift_norm: float
    mu_N_V: object
    eps: float = None
    warnings: list = field(default_factory=list)

    @property
    def bound_instance(self):
        """4 lam ||Delta|| mu(N,V) E(w); E(w) <= dist(f, V) for any f with M f = w."""
        if self.mu_N_V.infinite:
            return np.inf
        return 4.0 * self.lam * self.lift_norm * self.mu_N_V.upper * self.E

    @property
    def bound_global(self):
        if self.eps is None:
            return None
        if self.mu_N_V.infinite:
            return np.inf
        return 4.0 * self.lam * self.lift_norm * self.eps * self.mu_N_V.upper

    def to_dict(self):
        def fl(x):
            if x is None:
                return None
            return "INFINITE" if not np.isfinite(x) else float(x)
        return {"data_residual": fl(self.data_residual), "model_distance": fl(self.model_distance),
                "E": fl(self.E), "lam": fl(self.lam), "lift_norm": fl(self.lift_norm),
                "mu_N_V": self.mu_N_V.to_dict(), "bound_instance": fl(self.bound_instance),
                "bound_global": fl(self.bound_global), "warnings": list(self.warnings)}


def _check_pipeline(P, Lam, D):
    if Lam.M is not P.M or D.M is not P.M:
        raise StructuralError("approximation map and lifting must be built on the problem's M")


def _residual(M, x, w):
    return float(np.max(np.abs(apply(M, x) - w), initial=0.0) / max(1.0, float(np.max(np.abs(w), initial=0.0))))


def recover(P, w, Lam=None, D=None, lift_norm=None):
    """Run A on the measurements w and return a RecoveryReport."""
    if Lam is None or D is None:
        L0, D0 = default_pipeline(P)
        Lam = Lam or L0
        D = D or D0
    _check_pipeline(P, Lam, D)
    w = np.asarray(w, dtype=float).ravel()
    res = approximate(Lam, w)
    v = P.V.basis @ res.c
    x = v + lift_values(D, w - res.z)
    sp = P.space
    nd = lift_norm_value(D) if lift_norm is None else float(lift_norm)
    return RecoveryReport(
        reconstruction=Element(sp, x), v_component=Element(sp, v),
        data_residual=_residual(P.M, x, w), model_distance=dist_to_subspace(sp, x, P.V)[0],
        E=res.best_error, lam=Lam.lam, lift_norm=nd, mu_N_V=P.mu_N_V, eps=P.eps,
        warnings=list(res.warnings))


def recover_into_V(P, w, Lam=None):
    """V-valued variant M_V^{-1} Lambda(w): the lifted correction is dropped."""
    if Lam is None:
        Lam = default_pipeline(P)[0]
    if Lam.M is not P.M:
        raise StructuralError("approximation map must be built on the problem's M")
    w = np.asarray(w, dtype=float).ravel()
    res = approximate(Lam, w)
    v = P.V.basis @ res.c
    sp = P.space
    return RecoveryReport(
        reconstruction=Element(sp, v), v_component=Element(sp, v),
        data_residual=_residual(P.M, v, w), model_distance=0.0, E=res.best_error,
        lam=Lam.lam, lift_norm=0.0, mu_N_V=P.mu_N_V, eps=P.eps, warnings=list(res.warnings))


@dataclass
class CertificateRow:
    check: str
    value: float
    bound: float
    passed: bool

    def to_dict(self):
        def fl(x):
            return "INFINITE" if not np.isfinite(x) else float(x)
        return {"check": self.check, "value": fl(self.value), "bound": fl(self.bound),
                "passed": bool(self.passed)}


def certify(P, report, f_true=None, tol=1e-6):
    """Certificate table for a recovery. Failed checks are rows, not exceptions."""
    rows = []
    lam_d = report.lam * report.lift_norm
    rows.append(CertificateRow("data_residual", report.data_residual, 1e-8,
                               report.data_residual <= 1e-8))
    rows.append(CertificateRow("model_distance <= lam*|Delta|*E", report.model_distance,
                               lam_d * report.E, report.model_distance <= lam_d * report.E * (1 + tol) + 1e-10))
    if P.eps is not None:
        member_bound = lam_d * P.eps
        rows.append(CertificateRow("membership in K_w(lam*|Delta|*eps, V)", report.model_distance,
                                   member_bound, report.model_distance <= member_bound * (1 + tol) + 1e-10))
        rows.append(CertificateRow("bound_global", report.bound_global, report.bound_global,
                                   bool(np.isfinite(report.bound_global))))
    if f_true is not None:
        f = f_true.values if isinstance(f_true, Element) else np.asarray(f_true, dtype=float)
        err = norm(P.space, report.reconstruction.values - f)
        d = dist_to_subspace(P.space, f, P.V)[0]
        mu = P.mu_N_V.upper
        inst = 4.0 * lam_d * mu * d
        rows.append(CertificateRow("actual_error <= 4 lam |Delta| mu dist(f,V)", err, inst,
                                   err <= inst * (1 + tol) + 1e-8))
        ratio = err / inst if inst > 0 else (0.0 if err <= 1e-8 else np.inf)
        rows.append(CertificateRow("instance_ratio", ratio, 1.0, ratio <= 1.0 + tol))
        if P.eps is not None and d <= P.eps * (1 + 1e-12):
            rows.append(CertificateRow("actual_error <= bound_global", err, report.bound_global,
                                       err <= report.bound_global * (1 + tol) + 1e-8))
    return rows
