"""Progressive sampling: nested model families, n(m) selection, sweeps and stability estimates."""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .angles import mu_V_N
from .approx import ApproxMap, ApproxMethod
from .errors import NoAdmissibleError, PreconditionError, StructuralError
from .lift import make_lifting
from .measure import MeasureKind, apply, make_measurements, m_norm
from .recover import RecoveryProblem, default_pipeline, lift_norm_value, recover, recover_into_V
from .solvers import LinearProgram, require_optimal, solve_lp
from .spaces import NormKind, Space, Subspace, dist_to_subspace, make_subspace_presets, norm

NEST_TOL = 1e-9
FD_STEP = 1e-6
FOURIER_SCHEDULE = (0, 1, 2, 4, 8, 16, 32)


@dataclass
class NestedFamily:
    """V_0 in V_1 in ... in V_nmax with nonincreasing tolerances eps_n."""

    spaces: list
    epsilons: np.ndarray
    preset: str = "CUSTOM"

    def __post_init__(self):
        self.epsilons = np.asarray(self.epsilons, dtype=float).ravel()
        if len(self.spaces) != self.epsilons.size:
            raise StructuralError("one tolerance per model space is required")
        if np.any(self.epsilons < 0) or np.any(np.diff(self.epsilons) > 1e-15 * max(1.0, self.epsilons[0])):
            raise StructuralError("tolerances must be nonnegative and nonincreasing")
        for a, b in zip(self.spaces, self.spaces[1:]):
            c = np.linalg.lstsq(b.basis, a.basis, rcond=None)[0]
            res = np.max(np.abs(b.basis @ c - a.basis)) / max(1.0, np.max(np.abs(a.basis)))
            if res > NEST_TOL:
                raise StructuralError(f"{a.label} is not contained in {b.label} (residual {res:.3g})")

    def __len__(self):
        return len(self.spaces)


def preset_epsilons(preset, nmax, C=1.0, param=1.0):
    """LIP_ALPHA: C (n+1)^(-alpha); BERNSTEIN: C rho^(-n)."""
    n = np.arange(nmax + 1, dtype=float)
    preset = preset.upper()
    if preset == "LIP_ALPHA":
        return C * (n + 1.0) ** (-param)
    if preset == "BERNSTEIN":
        if param <= 1.0:
            raise PreconditionError("BERNSTEIN needs rho > 1")
        return C * float(param) ** (-n)
    raise StructuralError(f"unknown tolerance preset {preset!r}")


def nested_family(space, family, nmax, preset="LIP_ALPHA", C=1.0, param=1.0, probe=None):
    """TRIG(n) or POLY(n) for n = 0..nmax with preset tolerances.

    preset 'PROBE' sets eps_n = dist(probe, V_n), the smallest class containing the probe.
    """
    spaces = [make_subspace_presets(family, space, n) for n in range(nmax + 1)]
    if preset.upper() == "PROBE":
        if probe is None:
            raise PreconditionError("PROBE tolerances need a probe element")
        eps = np.array([dist_to_subspace(space, probe, V)[0] for V in spaces])
        eps = np.minimum.accumulate(eps)
    else:
        eps = preset_epsilons(preset, nmax, C, param)
    return NestedFamily(spaces, eps, preset.upper())


# ---------------------------------------------------------------- selection

@dataclass
class Selection:
    n_star: int
    score: float
    mus: list
    scores: list


def select_n(F, M, rel_tie=1e-12):
    """argmin over admissible n of mu(V_n, N_m) eps_n, ties toward the smaller n."""
    best, best_n = np.inf, None
    mus, scores = [], []
    for n, (V, e) in enumerate(zip(F.spaces, F.epsilons)):
        if V.dim > M.m:
            mus.append(None)
            scores.append(np.inf)
            continue
        mu = mu_V_N(M, V)
        mus.append(mu)
        s = np.inf if mu.infinite else mu.value * e
        scores.append(s)
        if s < best * (1.0 - rel_tie) or (best_n is None and np.isfinite(s)):
            best, best_n = s, n
    if best_n is None:
        raise NoAdmissibleError("no admissible model space: every angle constant is infinite")
    return Selection(best_n, best, mus, scores)


# ---------------------------------------------------------------- schedules

def point_schedule(space, ms, offset=0):
    """Nested equispaced point evaluations: each operator lists the previous points first."""
    ops, idx = [], []
    for m in ms:
        new = [int(i) for i in offset + np.arange(m) * (space.N // m)] if space.N % m == 0 else None
        if new is None:
            raise PreconditionError(f"grid size {space.N} is not a multiple of {m}")
        have = set(idx)
        extra = [i for i in new if i not in have]
        if len(have) + len(extra) != m:
            raise PreconditionError("point schedule is not nested")
        idx = idx + extra
        ops.append(make_measurements("POINT_EVAL", {"indices": idx}, space))
    return ops


def fourier_schedule(space, Ks=FOURIER_SCHEDULE):
    return [make_measurements("FOURIER", {"m": 2 * K + 1}, space) for K in Ks]


def _check_nested(schedule):
    for a, b in zip(schedule, schedule[1:]):
        if b.m < a.m or np.max(np.abs(b.rows[:a.m] - a.rows)) > 1e-12:
            raise PreconditionError("measurement schedule must extend the previous rows")


# ---------------------------------------------------------------- gamma norming

@dataclass
class GammaNorming:
    value: float
    method: str


def gamma_norming(M, V):
    """min over unit v in V of sup over unit functionals l in span{l_j} of |l(v)|.

    SUP with a cube M-norm: 1/gamma = max_i min{ ||a||_1 : sum_j a_j l_j = delta_i on V },
    the dual of the angle sweep. HILBERT: smallest generalized eigenvalue of the
    M-norm Gram matrix against the V Gram matrix. Otherwise 1 / mu(V, N).
    """
    sp = M.space
    Z = M.rows @ V.basis
    if sp.kind is NormKind.HILBERT or sp.p == 2.0:
        Q, G, sw = M._whitened_qr
        Gi = scipy.linalg.solve_triangular(G, Z, trans="T")
        A = Gi.T @ Gi
        B = V.basis.T @ (sp.weights[:, None] * V.basis)
        lam = scipy.linalg.eigh(A, B, eigvals_only=True)
        return GammaNorming(float(np.sqrt(max(lam[0], 0.0))), "generalized eigenvalue")
    if sp.kind is NormKind.SUP and M.is_cube:
        m, n = Z.shape
        A_eq = np.hstack([Z.T, -Z.T])
        worst = 0.0
        for i in range(sp.N):
            lp = LinearProgram(np.ones(2 * m), A_eq, ("=",) * n, V.basis[i], 0.0, np.inf)
            rep = solve_lp(lp)
            if rep.status.value == "INFEASIBLE":
                return GammaNorming(0.0, "norming lp")
            require_optimal(rep, "norming constant")
            worst = max(worst, rep.objective_value)
        return GammaNorming(1.0 / worst if worst > 0 else 0.0, "norming lp")
    mu = mu_V_N(M, V)
    return GammaNorming(0.0 if mu.infinite else 1.0 / mu.upper, "reciprocal angle")


# ---------------------------------------------------------------- sweeps

@dataclass
class SweepRow:
    m: int
    n_of_m: int
    mu: float
    epsilon: float
    bound: float
    actual_error: float
    gamma: float

    def to_dict(self):
        return {k: getattr(self, k) for k in ("m", "n_of_m", "mu", "epsilon", "bound", "actual_error", "gamma")}


@dataclass
class SweepTable:
    rows: list
    constant: float
    converged: bool
    warnings: list = field(default_factory=list)

    HEADER = ("m", "n_of_m", "mu", "epsilon", "bound", "actual_error", "gamma")

    def to_csv(self):
        lines = [",".join(self.HEADER)]
        for r in self.rows:
            lines.append(",".join(_fmt(v) for v in r.to_dict().values()))
        return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if not np.isfinite(v):
        return "INFINITE"
    return f"{float(v):.12g}"


def sweep(F, schedule, f_probe, into_V=False, with_gamma=True):
    """Recover f_probe along a nested schedule, choosing n(m) at each step.

    The bound column is 8 lam ||Delta|| mu(V_n, N_m) eps_n, which follows from
    mu(N, V) <= 1 + mu(V, N) <= 2 mu(V, N) and the 4 lam ||Delta|| eps mu(N, V) guarantee.
    """
    _check_nested(schedule)
    sp = F.spaces[0].space
    f = np.asarray(getattr(f_probe, "values", f_probe), dtype=float)
    rows, consts = [], []
    for M in schedule:
        sel = select_n(F, M)
        n = sel.n_star
        V = F.spaces[n]
        P = RecoveryProblem(V, M, eps=float(F.epsilons[n]))
        Lam, D = default_pipeline(P)
        w = apply(M, f)
        if into_V:
            rep = recover_into_V(P, w, Lam)
            c = 8.0 * Lam.lam * (1.0 + lift_norm_value(D))
        else:
            rep = recover(P, w, Lam, D)
            c = 8.0 * Lam.lam * rep.lift_norm
        mu = sel.mus[n].value
        err = norm(sp, rep.reconstruction.values - f)
        g = gamma_norming(M, V).value if with_gamma else np.nan
        rows.append(SweepRow(M.m, n, mu, float(F.epsilons[n]), c * mu * float(F.epsilons[n]), err, g))
        consts.append(c)
    errs = np.array([r.actual_error for r in rows])
    converged = bool(errs.size >= 2 and errs[-1] <= errs[0] and errs[-1] <= 0.5 * max(errs[0], 1e-300)) \
        or bool(errs.size and errs[-1] <= 1e-8)
    return SweepTable(rows, float(max(consts)) if consts else 0.0, converged)


# ---------------------------------------------------------------- condition numbers

@dataclass
class ConditionEstimate:
    estimate: float
    structural_bound: float
    bound_kind: str


def condition_estimate(P, Lam=None, k=8, h=FD_STEP, seed=0):
    """Finite-difference estimate of the Lipschitz constant of f -> M_V^{-1} Lambda(M f).

    Central differences with step h over k base points and k unit directions.
    The structural bound is ||M_V^{-1}|| Lip(Lambda): Lip = 1 for least
    squares; for minimax fits 2 sqrt(n) is used as a heuristic constant.
    """
    if Lam is None:
        Lam = default_pipeline(P)[0]
    sp = P.space
    rng = np.random.default_rng(seed)
    V = P.V

    def R(f):
        return V.basis @ _coeffs(Lam, apply(P.M, f))

    best = 0.0
    for _ in range(k):
        f = V.basis @ rng.standard_normal(V.dim) + rng.standard_normal(sp.N)
        for _ in range(k):
            g = rng.standard_normal(sp.N)
            g /= norm(sp, g)
            d = norm(sp, R(f + h * g) - R(f - h * g)) / (2.0 * h)
            best = max(best, d)
    muv = P.mu_V_N.upper
    if Lam.method is ApproxMethod.LEAST_SQUARES:
        return ConditionEstimate(best, muv, "structural")
    return ConditionEstimate(best, 2.0 * muv * np.sqrt(V.dim), "heuristic")


def _coeffs(Lam, w):
    from .approx import approximate
    return approximate(Lam, w).c


# ---------------------------------------------------------------- l1 totality

@dataclass
class TotalityRow:
    m: int
    N_trunc: int
    dist: float
    mu: float
    truncation_change: float


def totality_operator(a, m, N_trunc, literal=False):
    """Truncated l_1 functionals l_1 = e_1* - a sum_{j>=2} e_j*, l_k = e_k* (2 <= k <= m).

    ``literal=True`` uses l_1 = a e_1* - sum_{j>=2} e_j* instead, for which
    dist(e_1, N_m) = min(1, a).
    """
    sp = Space.sequence(N_trunc, "L1")
    R = np.zeros((m, N_trunc))
    if literal:
        R[0, 0] = a
        R[0, 1:] = -1.0
    else:
        R[0, 0] = 1.0
        R[0, 1:] = -a
    for k in range(2, m + 1):
        R[k - 1, k - 1] = 1.0
    return make_measurements("GENERAL", {"rows": R}, sp)


def l1_totality_demo(a, m, N_trunc=64, literal=False):
    """dist(e_1, N_m) and mu(span{e_1}, N_m) in truncated l_1 for m = 1..m."""
    if a <= 1.0:
        raise PreconditionError("the demo needs a > 1")
    warnings = []
    if N_trunc < m + 3:
        warnings.append(f"N_trunc = {N_trunc} < m + 3; distances are extrapolated from a larger truncation")
        N_trunc = m + 3
    rows = []
    for mm in range(1, m + 1):
        vals = []
        for Nt in (N_trunc, 2 * N_trunc):
            M = totality_operator(a, mm, Nt, literal)
            e1 = np.zeros(Nt)
            e1[0] = 1.0
            vals.append(m_norm(M, apply(M, e1)))
        M = totality_operator(a, mm, N_trunc, literal)
        V = Subspace(M.space, np.eye(N_trunc)[:, :1], "span{e1}")
        mu = mu_V_N(M, V)
        rows.append(TotalityRow(mm, N_trunc, vals[0], mu.value, abs(vals[1] - vals[0])))
    return rows, warnings
