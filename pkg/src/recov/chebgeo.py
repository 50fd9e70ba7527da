"""Small exact oracles: diameter, Chebyshev radius and restricted radius of polytopes and K_w."""

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.linalg
import scipy.optimize

from . import kernels
from .errors import PreconditionError, SizeError, StructuralError
from .solvers import LinearProgram, LPStatus, min_norm_point, require_optimal, solve_lp
from .spaces import NormKind

MAX_COMBINATIONS = 2_000_000
BATCH = 20_000
VERTEX_TOL = 1e-9
TIE_BREAK_SLACK = 1e-9

OK, EMPTY, UNBOUNDED = "OK", "EMPTY", "UNBOUNDED"


@dataclass
class PolytopeSet:
    """Convex polytope in R^dim with a SUP, L1 or HILBERT (weighted) norm.

    V-rep: ``vertices`` (K x dim). H-rep: ``A_ub z <= b_ub`` and
    ``A_eq z = b_eq`` over z in R^D, D >= dim, where the ambient point is
    z[:dim] and the remaining coordinates are auxiliary.
    """

    dim: int
    kind: NormKind = NormKind.SUP
    p: float = np.inf
    weights: np.ndarray = None
    vertices: np.ndarray = None
    A_ub: np.ndarray = None
    b_ub: np.ndarray = None
    A_eq: np.ndarray = None
    b_eq: np.ndarray = None
    status: str = OK
    _vcache: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.kind = NormKind(self.kind)
        if self.kind is NormKind.SUP:
            self.p = np.inf
        elif self.kind is NormKind.HILBERT:
            self.p = 2.0
        elif float(self.p) != 1.0:
            raise StructuralError("polytope oracles support SUP, L1 and HILBERT norms")
        self.weights = np.ones(self.dim) if self.weights is None else np.asarray(self.weights, dtype=float)
        if self.vertices is not None:
            self.vertices = np.atleast_2d(np.asarray(self.vertices, dtype=float))
            if self.vertices.shape[0] == 0:
                raise StructuralError("a V-rep needs at least one vertex")
            if self.vertices.shape[1] != self.dim:
                raise StructuralError("vertex dimension does not match")

    @classmethod
    def from_vertices(cls, vertices, kind="SUP", weights=None):
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        kind, p = _kind(kind)
        return cls(V.shape[1], kind, p, weights, vertices=V)

    @classmethod
    def from_hrep(cls, dim, A_ub=None, b_ub=None, A_eq=None, b_eq=None, kind="SUP", weights=None):
        kind, p = _kind(kind)
        S = cls(dim, kind, p, weights, None,
                None if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float)),
                None if b_ub is None else np.asarray(b_ub, dtype=float).ravel(),
                None if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float)),
                None if b_eq is None else np.asarray(b_eq, dtype=float).ravel())
        S.status = _probe(S)
        return S

    @property
    def n_aux(self):
        return 0 if self.vertices is not None else self._D - self.dim

    @property
    def _D(self):
        for A in (self.A_ub, self.A_eq):
            if A is not None and A.size:
                return A.shape[1]
        return self.dim


def _kind(kind):
    if isinstance(kind, NormKind):
        return kind, (np.inf if kind is NormKind.SUP else 2.0)
    k = str(kind).upper()
    if k in ("L1", "LP(1)"):
        return NormKind.LP, 1.0
    return NormKind(k), None


def _lp(S, cost):
    D = S._D
    parts_A, rel, b = [], [], []
    if S.A_ub is not None and S.A_ub.size:
        parts_A.append(S.A_ub)
        rel += ["<="] * S.A_ub.shape[0]
        b.append(S.b_ub)
    if S.A_eq is not None and S.A_eq.size:
        parts_A.append(S.A_eq)
        rel += ["="] * S.A_eq.shape[0]
        b.append(S.b_eq)
    A = np.vstack(parts_A) if parts_A else np.zeros((0, D))
    return LinearProgram(cost, A, tuple(rel), np.concatenate(b) if b else np.zeros(0), -np.inf, np.inf)


def _probe(S):
    """Feasibility and boundedness of the ambient projection."""
    D = S._D
    rep = solve_lp(_lp(S, np.zeros(D)))
    if rep.status is LPStatus.INFEASIBLE:
        return EMPTY
    require_optimal(rep, "feasibility probe")
    for i in range(S.dim):
        for sgn in (1.0, -1.0):
            c = np.zeros(D)
            c[i] = sgn
            r = solve_lp(_lp(S, c))
            if r.status is LPStatus.UNBOUNDED:
                return UNBOUNDED
            require_optimal(r, "boundedness probe")
    return OK


def _require_ok(S):
    if S.status != OK:
        raise PreconditionError(f"set is {S.status}")


# ---------------------------------------------------------------- vertices

def enumerate_vertices(S, max_combinations=MAX_COMBINATIONS):
    """Vertices of the ambient projection (a superset of its extreme points).

    Equalities are eliminated, then every choice of r independent active
    inequalities in the r-dimensional parameter space is solved in batches.
    """
    if S.vertices is not None:
        return S.vertices
    if S._vcache is not None:
        return S._vcache
    _require_ok(S)
    D = S._D
    if S.A_eq is not None and S.A_eq.size:
        z0 = np.linalg.lstsq(S.A_eq, S.b_eq, rcond=None)[0]
        B = scipy.linalg.null_space(S.A_eq, rcond=1e-12)
    else:
        z0, B = np.zeros(D), np.eye(D)
    r = B.shape[1]
    if r == 0:
        S._vcache = z0[None, :S.dim].copy()
        return S._vcache
    G = S.A_ub @ B
    h = S.b_ub - S.A_ub @ z0
    nrm = np.linalg.norm(G, axis=1)
    keep = nrm > 1e-12
    G, h = G[keep] / nrm[keep, None], h[keep] / nrm[keep]
    k = G.shape[0]
    total = comb(k, r)
    if total > max_combinations:
        raise SizeError(f"vertex enumeration needs {total} active sets (cap {max_combinations}); "
                        "use the sampled mode")
    scale = 1.0 + float(np.max(np.abs(h), initial=0.0))
    found = []
    it = itertools.combinations(range(k), r)
    while True:
        chunk = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, BATCH)), dtype=np.int64)
        if chunk.size == 0:
            break
        idx = chunk.reshape(-1, r)
        Gs = G[idx]
        det = np.linalg.det(Gs)
        ok = np.abs(det) > 1e-10
        if not np.any(ok):
            continue
        t = np.linalg.solve(Gs[ok], h[idx[ok]][..., None])[..., 0]
        feas = np.all(t @ G.T <= h + VERTEX_TOL * scale, axis=1)
        found.append(t[feas])
    T = np.vstack(found) if found else np.zeros((0, r))
    if T.shape[0] == 0:
        raise StructuralError("no vertices found; the set may be unbounded")
    X = (z0 + T @ B.T)[:, :S.dim]
    X = _dedupe(X)
    S._vcache = X
    return X


def _dedupe(X, tol=1e-9):
    scale = 1.0 + float(np.max(np.abs(X), initial=0.0))
    key = np.round(X / (tol * scale)).astype(np.int64)
    _, first = np.unique(key, axis=0, return_index=True)
    return X[np.sort(first)]


# ---------------------------------------------------------------- diameter

@dataclass
class GeoValue:
    value: float
    tag: str
    certificate: tuple = None


def _norm_code(S):
    if S.kind is NormKind.SUP:
        return 0, 1.0
    if S.kind is NormKind.HILBERT:
        return 2, 2.0
    return 1, float(S.p)


def _dist(S, x, y):
    d = np.asarray(x) - np.asarray(y)
    if S.kind is NormKind.SUP:
        return float(np.max(np.abs(d), initial=0.0))
    if S.kind is NormKind.HILBERT:
        return float(np.sqrt(np.sum(S.weights * d * d)))
    return float(np.sum(S.weights * np.abs(d)))


def diameter(S, mode="exact", samples=256, seed=0):
    """sup of ||f - g|| over S: exact over vertex pairs, or a sampled lower bound."""
    if isinstance(S, EllipsoidSet):
        return GeoValue(S.diameter, "exact", S.diameter_pair)
    if mode == "sampled":
        P = _sample_boundary(S, samples, seed)
        tag = "lower"
    else:
        P = enumerate_vertices(S)
        tag = "exact"
    if P.shape[0] < 2:
        return GeoValue(0.0, tag, (P[0], P[0]))
    code, p = _norm_code(S)
    val, (i, j) = kernels.pairwise_max_dist(np.ascontiguousarray(P), np.ascontiguousarray(S.weights), code, p)
    return GeoValue(float(val), tag, (P[i], P[j]))


def _sample_boundary(S, samples, seed):
    if S.vertices is not None:
        return S.vertices
    _require_ok(S)
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(samples):
        c = np.zeros(S._D)
        c[:S.dim] = rng.standard_normal(S.dim)
        rep = require_optimal(solve_lp(_lp(S, c)), "boundary sample")
        pts.append(rep.solution[:S.dim])
    return _dedupe(np.array(pts))


# ---------------------------------------------------------------- centers

@dataclass
class Ball:
    center: np.ndarray
    radius: float
    status: str = OK
    tag: str = "exact"

    def __iter__(self):
        yield self.center
        yield self.radius


def _sup_box(P):
    return P.max(axis=0), P.min(axis=0)


def chebyshev_center_radius(S):
    """Smallest enclosing ball: center a and radius max over vertices of ||v - a||.

    Polyhedral norms use an LP with a least-Euclidean-norm tie-break on the
    center. HILBERT uses an exact move-to-front smallest enclosing ball.
    """
    if isinstance(S, EllipsoidSet):
        return Ball(S.center, S.radius)
    if S.vertices is None and S.status != OK:
        return Ball(None, np.inf if S.status == UNBOUNDED else 0.0, S.status)
    P = enumerate_vertices(S)
    d = S.dim
    if S.kind is NormKind.HILBERT:
        sw = np.sqrt(S.weights)
        c, r = miniball(P * sw)
        return Ball(c / sw, r)
    if S.kind is NormKind.SUP:
        # |v_k - a|_i <= r for all k reduces to the per-coordinate extremes
        hi, lo = _sup_box(P)
        A = np.vstack([np.hstack([-np.eye(d), -np.ones((d, 1))]), np.hstack([np.eye(d), -np.ones((d, 1))])])
        b = np.concatenate([-hi, lo])
        cost = np.zeros(d + 1)
        cost[-1] = 1.0
        rep = require_optimal(solve_lp(LinearProgram.from_parts(cost, A_ub=A, b_ub=b, lower=-np.inf, upper=np.inf)),
                              "Chebyshev center")
        r = max(rep.objective_value, 0.0)
        cap = r * (1 + TIE_BREAK_SLACK) + 1e-15
        a = min_norm_point(A_ub=np.vstack([-np.eye(d), np.eye(d)]), b_ub=np.concatenate([cap - hi, lo + cap]), n=d)
        if a is None:
            a = rep.solution[:d]
        return Ball(a, r)
    # L1: u_k >= |v_k - a|, sum_i w_i u_ki <= r
    K = P.shape[0]
    nv = d + 1 + K * d
    rows, b = [], []
    for k in range(K):
        for i in range(d):
            col = d + 1 + k * d + i
            for sgn in (1.0, -1.0):
                row = np.zeros(nv)
                row[i] = -sgn
                row[col] = -1.0
                rows.append(row)
                b.append(-sgn * P[k, i])
        row = np.zeros(nv)
        row[d + 1 + k * d: d + 1 + (k + 1) * d] = S.weights
        row[d] = -1.0
        rows.append(row)
        b.append(0.0)
    cost = np.zeros(nv)
    cost[d] = 1.0
    lo = np.full(nv, -np.inf)
    lo[d + 1:] = 0.0
    rep = require_optimal(solve_lp(LinearProgram.from_parts(cost, A_ub=np.array(rows), b_ub=np.array(b),
                                                            lower=lo, upper=np.inf)), "Chebyshev center")
    return Ball(rep.solution[:d], max(rep.objective_value, 0.0))


def restricted_radius(S):
    """Smallest ball with center constrained to lie in S."""
    if isinstance(S, EllipsoidSet):
        return Ball(S.center, S.radius)
    if S.vertices is None and S.status != OK:
        return Ball(None, np.inf if S.status == UNBOUNDED else 0.0, S.status)
    P = enumerate_vertices(S)
    d = S.dim
    K = P.shape[0]
    if S.vertices is not None:
        # center a = sum_k lam_k v_k with lam in the simplex
        D = K
        embed = P.T
        A_in, b_in = None, None
        A_eq, b_eq = np.ones((1, K)), np.ones(1)
        lo_z = np.zeros(K)
    else:
        D = S._D
        embed = np.eye(D)[:d]
        A_in, b_in = S.A_ub, S.b_ub
        A_eq, b_eq = S.A_eq, S.b_eq
        lo_z = np.full(D, -np.inf)
    if S.kind is NormKind.HILBERT:
        return _restricted_hilbert(S, P, embed, A_in, b_in, A_eq, b_eq, lo_z)
    if S.kind is not NormKind.SUP:
        raise PreconditionError("restricted radius supports SUP and HILBERT norms")
    hi, lo = _sup_box(P)
    # variables (z, r): embed z >= hi - r, embed z <= lo + r
    A = [np.hstack([-embed, -np.ones((d, 1))]), np.hstack([embed, -np.ones((d, 1))])]
    b = [-hi, lo]
    if A_in is not None and A_in.size:
        A.append(np.hstack([A_in, np.zeros((A_in.shape[0], 1))]))
        b.append(b_in)
    Aeq = None if A_eq is None or not A_eq.size else np.hstack([A_eq, np.zeros((A_eq.shape[0], 1))])
    cost = np.zeros(D + 1)
    cost[-1] = 1.0
    lower = np.concatenate([lo_z, [-np.inf]])
    rep = require_optimal(solve_lp(LinearProgram.from_parts(cost, A_ub=np.vstack(A), b_ub=np.concatenate(b),
                                                            A_eq=Aeq, b_eq=b_eq, lower=lower, upper=np.inf)),
                          "restricted center")
    return Ball(embed @ rep.solution[:D], max(rep.objective_value, 0.0))


def _restricted_hilbert(S, P, embed, A_in, b_in, A_eq, b_eq, lo_z):
    sw = np.sqrt(S.weights)
    D = embed.shape[1]
    cons = []
    if A_in is not None and A_in.size:
        cons.append({"type": "ineq", "fun": lambda z: b_in - A_in @ z[:D], "jac": lambda z: -np.hstack([A_in, np.zeros((A_in.shape[0], 1))])})
    if A_eq is not None and A_eq.size:
        cons.append({"type": "eq", "fun": lambda z: A_eq @ z[:D] - b_eq, "jac": lambda z: np.hstack([A_eq, np.zeros((A_eq.shape[0], 1))])})

    def gap(z):
        diff = (P - embed @ z[:D]) * sw
        return z[D] - np.sum(diff * diff, axis=1)

    def gap_jac(z):
        diff = (P - embed @ z[:D]) * sw
        J = np.empty((P.shape[0], D + 1))
        J[:, :D] = 2.0 * (diff * sw) @ embed
        J[:, D] = 1.0
        return J

    cons.append({"type": "ineq", "fun": gap, "jac": gap_jac})
    z0 = np.zeros(D)
    if S.vertices is not None:
        z0[:] = 1.0 / D
    else:
        z0 = require_optimal(solve_lp(_lp(S, np.zeros(D))), "restricted center start").solution
    t0 = float(np.max(np.sum(((P - embed @ z0) * sw) ** 2, axis=1)))
    bounds = [(None if not np.isfinite(l) else l, None) for l in lo_z] + [(0, None)]
    res = scipy.optimize.minimize(lambda z: z[D], np.append(z0, t0), jac=lambda z: np.eye(D + 1)[D],
                                  constraints=cons, bounds=bounds, method="SLSQP",
                                  options={"ftol": 1e-14, "maxiter": 1000})
    a = embed @ res.x[:D]
    r = float(np.sqrt(np.max(np.sum(((P - a) * sw) ** 2, axis=1))))
    return Ball(a, r, OK, "numeric")


# ---------------------------------------------------------------- smallest enclosing ball

def _circumball(B):
    """Smallest ball with all points of B on its boundary (within their affine hull)."""
    p0 = B[0]
    if len(B) == 1:
        return p0.copy(), 0.0
    A = np.array(B[1:]) - p0
    G = A @ A.T
    rhs = 0.5 * np.sum(A * A, axis=1)
    mu = np.linalg.lstsq(G, rhs, rcond=1e-14)[0]
    c = p0 + mu @ A
    return c, float(np.linalg.norm(c - p0))


def miniball(P, tol=1e-12):
    """Exact Euclidean smallest enclosing ball (move-to-front Welzl recursion).

    Points are processed in a fixed order, so the output is deterministic.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    d = P.shape[1]
    L = list(range(P.shape[0]))
    scale = 1.0 + float(np.max(np.abs(P)))

    def mtf(end, B):
        c, r = _circumball([P[i] for i in B]) if B else (P[L[0]].copy(), 0.0)
        if len(B) == d + 1:
            return c, r
        i = 0
        while i < end:
            j = L[i]
            if np.linalg.norm(P[j] - c) > r + tol * scale:
                c, r = mtf(i, B + [j])
                L.pop(i)
                L.insert(0, j)
            i += 1
        return c, r

    c, r = mtf(len(L), [])
    r = float(np.max(np.linalg.norm(P - c, axis=1)))
    return c, r


# ---------------------------------------------------------------- data-consistent sets

@dataclass
class EllipsoidSet:
    """K_w in a HILBERT ambient: center + {K s : ||C s|| <= r} in whitened coordinates."""

    center: np.ndarray
    radius: float
    diameter: float
    axis: np.ndarray
    gamma_eps: float
    status: str = OK

    @property
    def diameter_pair(self):
        return (self.center - self.axis, self.center + self.axis)


def build_Kw(P, w, eps=None):
    """K_w = {x : M x = w, dist(x, V) <= eps} as a polytope (SUP, L1) or an ellipsoid (HILBERT)."""
    eps = P.eps if eps is None else float(eps)
    if eps is None or eps < 0:
        raise PreconditionError("build_Kw needs eps >= 0")
    M, V = P.M, P.V
    sp = M.space
    w = np.asarray(w, dtype=float).ravel()
    R, B = M.rows, V.basis
    N, n = B.shape
    if sp.kind is NormKind.HILBERT or (sp.kind is NormKind.LP and sp.p == 2.0):
        return _hilbert_Kw(M, V, w, eps)
    if N > 12:
        raise SizeError(f"exact K_w geometry is limited to ambient dimension 12 (got {N})")
    if sp.kind is NormKind.SUP:
        # z = (x, c): R x = w, |x - B c| <= eps
        I = np.eye(N)
        A_ub = np.vstack([np.hstack([I, -B]), np.hstack([-I, B])])
        b_ub = np.full(2 * N, eps)
        A_eq = np.hstack([R, np.zeros((M.m, n))])
        return PolytopeSet.from_hrep(N, A_ub, b_ub, A_eq, w, "SUP", sp.weights)
    if sp.p == 1.0:
        # z = (x, c, u): u >= |x - B c|, sum w_i u_i <= eps
        I = np.eye(N)
        A_ub = np.vstack([np.hstack([I, -B, -I]), np.hstack([-I, B, -I]),
                          np.concatenate([np.zeros(N + n), sp.weights])[None, :]])
        b_ub = np.concatenate([np.zeros(2 * N), [eps]])
        A_eq = np.hstack([R, np.zeros((M.m, n + N))])
        return PolytopeSet.from_hrep(N, A_ub, b_ub, A_eq, w, "L1", sp.weights)
    raise PreconditionError("build_Kw supports SUP, L1 and HILBERT ambients")


def _hilbert_Kw(M, V, w, eps):
    Q, G, sw = M._whitened_qr
    # particular whitened solution and whitened null-space basis
    xp = Q @ scipy.linalg.solve_triangular(G, w, trans="T")
    K = M.nullspace_basis
    Kt = np.linalg.qr(sw[:, None] * K)[0] if K.size else np.zeros((M.N, 0))
    UV = np.linalg.qr(sw[:, None] * V.basis)[0]
    a = xp - UV @ (UV.T @ xp)
    C = Kt - UV @ (UV.T @ Kt)
    if C.shape[1] == 0:
        E = float(np.linalg.norm(a))
        if E > eps * (1 + 1e-12):
            return EllipsoidSet(None, 0.0, 0.0, None, E, EMPTY)
        x = xp / sw
        return EllipsoidSet(x, 0.0, 0.0, np.zeros(M.N), E)
    U, s, Vt = np.linalg.svd(C, full_matrices=False)
    t_star = -Vt.T @ ((U.T @ a) / np.where(s > 1e-14 * s[0], s, np.inf))
    E = float(np.linalg.norm(a + C @ t_star))
    if E > eps * (1 + 1e-12) + 1e-15:
        return EllipsoidSet(None, 0.0, 0.0, None, E, EMPTY)
    r2 = max(eps * eps - E * E, 0.0)
    r = np.sqrt(r2)
    s_min = s[-1]
    center = (xp + Kt @ t_star) / sw
    if s_min <= 1e-14 * max(s[0], 1.0):
        if r > 0:
            return EllipsoidSet(center, np.inf, np.inf, None, E, UNBOUNDED)
        return EllipsoidSet(center, 0.0, 0.0, np.zeros(M.N), E)
    rad = r / s_min
    axis = (Kt @ Vt[-1]) * rad / sw
    return EllipsoidSet(center, rad, 2.0 * rad, axis, E)
