"""Angle constants mu(V, N), mu(N, V) and the a priori radius bounds."""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .approx import ApproxMap, approx_error_E, standing_assumption_witness
from .errors import StructuralError
from .measure import m_norm
from .solvers import LinearProgram, LPStatus, require_optimal, solve_lp
from .spaces import NormKind, best_approximation, norm

SWEEP_CHUNK = 64
MULTISTART = 16


@dataclass
class MuResult:
    """Value of an angle constant, exact when ``lower == upper``.

    ``witness`` is an element whose ratio reproduces ``lower``.
    """

    value: float
    lower: float
    upper: float
    method: str
    witness: np.ndarray = field(default=None, repr=False)
    infinite: bool = False

    @property
    def exact(self):
        return self.infinite or self.lower == self.upper

    def to_dict(self):
        if self.infinite:
            return {"value": "INFINITE", "lower": "INFINITE", "upper": "INFINITE",
                    "method": self.method}
        up = self.upper if np.isfinite(self.upper) else "INFINITE"
        return {"value": self.value, "lower": self.lower, "upper": up, "method": self.method}


def _infinite(witness, method):
    return MuResult(np.inf, np.inf, np.inf, method, witness, True)


@dataclass
class AngleReport:
    mu_V_N: MuResult
    mu_N_V: MuResult

    def to_dict(self):
        return {"mu_V_N": self.mu_V_N.to_dict(), "mu_N_V": self.mu_N_V.to_dict()}


def _threads():
    try:
        return max(1, int(os.environ.get("RECOV_THREADS", "1")))
    except ValueError:
        return 1


def _sweep(make_cost, lp_template, coords, extract):
    """Maximize a family of linear objectives over one feasible set.

    Coordinates are split into fixed chunks, each solved in order with warm
    starts. Chunking does not depend on the thread count, so results do not
    either. Returns (best value, best solution) with ties to the lowest index.
    """
    chunks = [coords[i:i + SWEEP_CHUNK] for i in range(0, len(coords), SWEEP_CHUNK)]

    def run(chunk):
        best, best_x, ws = -np.inf, None, None
        for i in chunk:
            lp = LinearProgram(make_cost(i), lp_template.A, lp_template.relations,
                               lp_template.b, lp_template.lower, lp_template.upper)
            rep = solve_lp(lp, warm_start=ws, dualize=False)
            if rep.status is LPStatus.UNBOUNDED:
                return np.inf, None
            require_optimal(rep, "angle sweep")
            ws = rep.basis_state
            val = extract(rep)
            if val > best:
                best, best_x = val, rep.solution
        return best, best_x

    nt = _threads()
    if nt > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=nt) as ex:
            results = list(ex.map(run, chunks))
    else:
        results = [run(c) for c in chunks]
    best, best_x = -np.inf, None
    for val, x in results:
        if val > best:
            best, best_x = val, x
    return best, best_x


def _cube_sweep(V, Z):
    """max_i max (V c)_i subject to |Z c| <= 1 (cube M-norm ball)."""
    N, n = V.shape
    m = Z.shape[0]
    A = np.vstack([Z, -Z])
    b = np.ones(2 * m)
    best, best_c = -np.inf, None
    for i in range(N):
        lp = LinearProgram(-V[i], A, ("<=",) * (2 * m), b, -np.inf, np.inf)
        rep = solve_lp(lp)
        if rep.status is LPStatus.UNBOUNDED:
            return np.inf, None
        require_optimal(rep, "angle sweep")
        if -rep.objective_value > best:
            best, best_c = -rep.objective_value, rep.solution
    return best, best_c


# ---------------------------------------------------------------- norm equivalence

def _equivalence_factor(space):
    """Constant K with mu_p <= K mu_2 from weighted Hoelder comparisons."""
    wt = space.weights
    e = abs(0.5 - 1.0 / space.p)
    return float((wt.sum() / wt.min()) ** e)


def _hilbert_mu(M, V):
    """(mu, singular vector data) from the whitened principal angles."""
    Q, _, sw = M._whitened_qr
    UV, _ = np.linalg.qr(sw[:, None] * V.basis)
    B = Q.T @ UV
    _, s, Vt = np.linalg.svd(B)
    s_min = s[-1] if s.size == V.dim else 0.0
    return s_min, UV, Vt, sw


# ---------------------------------------------------------------- mu(V, N)

def mu_V_N(M, V):
    """mu(V, N) = ||M_V^{-1}|| = sup over v in V of ||v|| / ||M v||_M."""
    wit = standing_assumption_witness(M, V)
    if wit is not None:
        return _infinite(wit, "rank")
    sp = M.space
    Z = M.rows @ V.basis
    if sp.kind is NormKind.HILBERT or sp.p == 2.0:
        s_min, UV, Vt, sw = _hilbert_mu(M, V)
        if s_min <= 1e-14:
            return _infinite(UV @ Vt[-1] / sw, "svd")
        val = 1.0 / s_min
        return MuResult(val, val, val, "whitened svd", UV @ Vt[-1] / sw)
    if sp.kind is NormKind.SUP:
        if M.is_cube:
            best, c = _cube_sweep(V.basis, Z)
        else:
            # max (V c)_i  s.t.  Z c - R u = 0, |u| <= 1
            N, n = V.basis.shape
            A = np.hstack([Z, -M.rows])
            lo = np.concatenate([np.full(n, -np.inf), -np.ones(N)])
            hi = np.concatenate([np.full(n, np.inf), np.ones(N)])
            tmpl = LinearProgram(np.zeros(n + N), A, ("=",) * M.m, np.zeros(M.m), lo, hi)

            def cost(i):
                cv = np.zeros(n + N)
                cv[:n] = -V.basis[i]
                return cv

            best, sol = _sweep(cost, tmpl, list(range(N)), lambda r: -r.objective_value)
            c = None if sol is None else sol[:n]
        if not np.isfinite(best):
            return _infinite(None, "lp sweep")
        return MuResult(best, best, best, "lp sweep", V.basis @ c)
    if V.dim == 1:
        v = V.basis[:, 0]
        val = norm(sp, v) / m_norm(M, Z[:, 0])
        return MuResult(val, val, val, "exact ratio", v)
    lo, c = _multistart_ratio(lambda c: norm(sp, V.basis @ c) / m_norm(M, Z @ c), V.dim)
    s_min = _hilbert_mu(M, V)[0]
    up = _equivalence_factor(sp) / s_min if s_min > 0 else np.inf
    return MuResult(lo, lo, max(up, lo), "multistart interval", V.basis @ c)


def _multistart_ratio(ratio, n, seed=0):
    rng = np.random.default_rng(seed)
    best, best_c = 0.0, None
    for _ in range(MULTISTART):
        c0 = rng.standard_normal(n)
        res = scipy.optimize.minimize(lambda c: -ratio(c) if np.any(c) else 0.0, c0,
                                      method="Nelder-Mead",
                                      options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 400 * n})
        val = ratio(res.x)
        if val > best:
            best, best_c = val, res.x
    return best, best_c


# ---------------------------------------------------------------- mu(N, V)

def mu_N_V(M, V):
    """mu(N, V) = sup{ ||eta|| : eta in N, dist(eta, V) <= 1 }."""
    wit = standing_assumption_witness(M, V)
    if wit is not None:
        return _infinite(wit, "rank")
    sp = M.space
    Z = M.rows @ V.basis
    N, n = V.basis.shape
    if sp.kind is NormKind.HILBERT or sp.p == 2.0:
        Q, _, sw = M._whitened_qr
        UV, _ = np.linalg.qr(sw[:, None] * V.basis)
        B = Q.T @ UV
        # compression of the null-space projector to V: I - B^T B
        C = np.eye(n) - B.T @ B
        lam, vec = np.linalg.eigh(C)
        gap = 1.0 - lam[-1]
        if gap <= 1e-14:
            return _infinite(UV @ vec[:, -1] / sw, "eigen")
        val = 1.0 / np.sqrt(gap)
        v = UV @ vec[:, -1]
        eta = (v - Q @ (Q.T @ v)) / sw
        return MuResult(val, val, val, "null-space compression", eta)
    if sp.kind is NormKind.SUP:
        # eta = u + V c with R u + Z c = 0, |u| <= 1; maximize eta_i
        A = np.hstack([M.rows, Z])
        lo = np.concatenate([-np.ones(N), np.full(n, -np.inf)])
        hi = np.concatenate([np.ones(N), np.full(n, np.inf)])
        tmpl = LinearProgram(np.zeros(N + n), A, ("=",) * M.m, np.zeros(M.m), lo, hi)

        def cost(i):
            cv = np.zeros(N + n)
            cv[i] = -1.0
            cv[N:] = -V.basis[i]
            return cv

        best, sol = _sweep(cost, tmpl, list(range(N)), lambda r: -r.objective_value)
        if not np.isfinite(best):
            return _infinite(None, "lp sweep")
        eta = sol[:N] + V.basis @ sol[N:]
        return MuResult(best, best, best, "lp sweep", eta)
    # LP(p): certified lower bound from sampled null-space directions, upper 1 + mu(V,N)
    K = M.nullspace_basis
    rng = np.random.default_rng(0)
    cands = [K @ (K.T @ V.basis[:, j]) for j in range(n)]
    cands += [K @ rng.standard_normal(K.shape[1]) for _ in range(MULTISTART)]
    best, best_eta = 0.0, None
    for eta in cands:
        d = best_approximation(sp, eta, V.basis)[1]
        if d <= 1e-14:
            continue
        r = norm(sp, eta) / d
        if r > best:
            best, best_eta = r, eta
    up = 1.0 + mu_V_N(M, V).upper
    best = max(best, 1.0)
    return MuResult(best, best, up, "sampled interval", best_eta)


def angle_report(M, V):
    return AngleReport(mu_V_N(M, V), mu_N_V(M, V))


def theta(mu):
    """Angle Theta = 1 / mu (0 when mu is infinite)."""
    return 0.0 if mu.infinite else 1.0 / mu.value


# ---------------------------------------------------------------- general pairs

def mu_subspaces(space, X, Y):
    """mu(X, Y) = sup over x in X of ||x|| / dist(x, Y) for basis matrices X, Y.

    SUP uses the LP sweep max (X a)_i s.t. |X a - Y b| <= 1; HILBERT the
    principal angles. Returns +inf when X meets Y.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    N = space.N
    if X.shape[0] != N:
        X = X.T
    if Y.shape[0] != N:
        Y = Y.T
    kx, ky = X.shape[1], Y.shape[1]
    if kx == 0:
        return 0.0
    if np.linalg.matrix_rank(np.hstack([X, Y]), tol=1e-10) < kx + np.linalg.matrix_rank(Y, tol=1e-10):
        return np.inf
    if space.kind is NormKind.HILBERT:
        sw = np.sqrt(space.weights)
        UX = np.linalg.qr(sw[:, None] * X)[0]
        if ky == 0:
            return 1.0
        UY = np.linalg.qr(sw[:, None] * Y)[0]
        c = np.linalg.norm(UY.T @ UX, 2)
        return 1.0 / np.sqrt(max(1.0 - c * c, 0.0))
    if space.kind is not NormKind.SUP:
        raise StructuralError("mu_subspaces supports SUP and HILBERT ambients")
    A = np.vstack([np.hstack([X, -Y]), np.hstack([-X, Y])])
    tmpl = LinearProgram(np.zeros(kx + ky), A, ("<=",) * (2 * N), np.ones(2 * N), -np.inf, np.inf)
    best = -np.inf
    for i in range(N):
        cv = np.zeros(kx + ky)
        cv[:kx] = -X[i]
        rep = solve_lp(LinearProgram(cv, tmpl.A, tmpl.relations, tmpl.b, tmpl.lower, tmpl.upper))
        if rep.status is LPStatus.UNBOUNDED:
            return np.inf
        require_optimal(rep, "subspace angle")
        best = max(best, -rep.objective_value)
    return best


# ---------------------------------------------------------------- radius bounds

@dataclass
class RadiusBounds:
    lower: float
    upper: float
    exact: bool
    infinite: bool = False

    def to_dict(self):
        if self.infinite:
            return {"lower": "INFINITE", "upper": "INFINITE", "exact": False}
        return {"lower": self.lower, "upper": self.upper, "exact": self.exact}


def radius_bounds(M, V, eps, w=None, mu=None):
    """Bounds on rad(K_w), or on the optimal recovery error R(K) when w is None.

    R(K) lies in [eps mu, 2 eps mu]. For w = M(v) the radius equals eps mu.
    Otherwise, with gamma = E(w) / eps, rad(K_w) >= (1 - gamma) eps mu.
    """
    eps = float(eps)
    if eps < 0:
        raise StructuralError("epsilon must be nonnegative")
    mu = mu_N_V(M, V) if mu is None else mu
    if mu.infinite:
        if eps == 0.0:
            return RadiusBounds(0.0, 0.0, True)
        return RadiusBounds(np.inf, np.inf, False, True)
    if eps == 0.0:
        return RadiusBounds(0.0, 0.0, True)
    if w is None:
        return RadiusBounds(eps * mu.lower, 2.0 * eps * mu.upper, False)
    E = approx_error_E(ApproxMap(M, V), w)
    if E <= 1e-9:
        return RadiusBounds(eps * mu.lower, eps * mu.upper, mu.exact)
    gamma = E / eps
    if gamma > 1.0:
        # K_w is empty
        return RadiusBounds(0.0, 0.0, True)
    return RadiusBounds((1.0 - gamma) * eps * mu.lower, 2.0 * eps * mu.upper, False)
