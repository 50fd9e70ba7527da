"""Moduli of convexity and smoothness and the diameter sandwich for K_w."""

from dataclasses import dataclass, field

import numpy as np

from .approx import ApproxMap, approx_error_E
from .errors import PreconditionError, StructuralError
from .spaces import NormKind

BISECTION_TOL = 1e-14
ASCENT_RESTARTS = 256
ASCENT_STEPS = 400


@dataclass(frozen=True)
class ModulusPair:
    """delta (convexity) and rho (smoothness) of a space.

    HILBERT_EXACT uses the parallelogram closed forms. LP_ASYMPTOTIC(p) uses
    the leading asymptotic terms and is tagged as asymptotic.
    """

    kind: str = "HILBERT_EXACT"
    p: float = 2.0

    def __post_init__(self):
        if self.kind not in ("HILBERT_EXACT", "LP_ASYMPTOTIC"):
            raise StructuralError(f"unknown modulus kind {self.kind!r}")
        if self.kind == "LP_ASYMPTOTIC" and not 1.0 < self.p < np.inf:
            raise PreconditionError("LP moduli need 1 < p < inf")

    @property
    def asymptotic(self):
        return self.kind == "LP_ASYMPTOTIC"

    def delta(self, e):
        e = float(e)
        if not 0.0 <= e <= 2.0:
            raise PreconditionError("delta is defined on [0, 2]")
        if self.kind == "HILBERT_EXACT":
            # 1 - sqrt(1 - e^2/4) without cancellation at small e
            q = e * e / 4.0
            return q / (1.0 + np.sqrt(max(1.0 - q, 0.0)))
        p = self.p
        if p < 2.0:
            return (p - 1.0) * e * e / 8.0
        return e ** p / (p * 2.0 ** p)

    def rho(self, t):
        t = float(t)
        if t < 0.0:
            raise PreconditionError("rho is defined for tau >= 0")
        if self.kind == "HILBERT_EXACT":
            # t^2 / (sqrt(1 + t^2) + 1) avoids cancellation; hypot avoids overflow
            return t * t / (np.hypot(1.0, t) + 1.0) if t < 1e150 else np.hypot(1.0, t) - 1.0
        p = self.p
        if p <= 2.0:
            return t ** p / p
        return (p - 1.0) * t * t / 2.0

    def delta_inv(self, y):
        """Smallest e in [0, 2] with delta(e) >= y (2 when y exceeds delta(2))."""
        y = float(y)
        if y < 0.0:
            raise PreconditionError("delta inverse needs y >= 0")
        if y >= self.delta(2.0):
            return 2.0
        return _bisect(self.delta, y, 0.0, 2.0)

    def rho_inv(self, y):
        y = float(y)
        if y < 0.0:
            raise PreconditionError("rho inverse needs y >= 0")
        hi = 1.0
        while self.rho(hi) < y:
            hi *= 2.0
        return _bisect(self.rho, y, 0.0, hi)


def _bisect(f, y, lo, hi):
    """Monotone bisection for f(x) = y on [lo, hi]."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= BISECTION_TOL * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def moduli_for(space):
    if space.kind is NormKind.HILBERT or (space.kind is NormKind.LP and space.p == 2.0):
        return ModulusPair("HILBERT_EXACT", 2.0)
    if space.kind is NormKind.LP and 1.0 < space.p < np.inf:
        return ModulusPair("LP_ASYMPTOTIC", space.p)
    raise PreconditionError("moduli need a uniformly convex ambient (1 < p < inf)")


def modulus(kind, which, t, p=2.0):
    """Evaluate DELTA or RHO for kind HILBERT_EXACT or LP_ASYMPTOTIC."""
    mp = ModulusPair(kind, p)
    which = which.upper()
    if which == "DELTA":
        return mp.delta(t)
    if which == "RHO":
        return mp.rho(t)
    raise StructuralError(f"unknown modulus {which!r}")


# ---------------------------------------------------------------- gamma and bounds

@dataclass
class GammaResult:
    value: float
    E: float
    status: str = "OK"


def gamma_of_Kw(P, w, eps=None):
    """gamma = E(w) / eps, the relative distance of the closest point of K_w to V."""
    eps = P.eps if eps is None else float(eps)
    if eps is None or eps <= 0:
        raise PreconditionError("gamma needs eps > 0")
    E = approx_error_E(ApproxMap(P.M, P.V), w)
    g = E / eps
    if g > 1.0 + 1e-12:
        return GammaResult(g, E, "OUT_OF_CLASS")
    return GammaResult(min(g, 1.0), E)


@dataclass
class SandwichBounds:
    lower: float
    upper: float
    lower_general: float
    asymptotic: bool


def sandwich_bounds(eps, mu, gamma, moduli):
    """Lower and upper bounds on diam(K_w) from the moduli of smoothness and convexity.

    upper = eps mu delta^{-1}(1 - gamma); lower = 2 eps mu gamma rho^{-1}((1 - gamma)/(2 gamma)),
    which tends to eps mu as gamma -> 0 and is used there in its limit form.
    """
    upper = eps * mu * moduli.delta_inv(1.0 - gamma)
    general = eps * (1.0 - gamma) * mu
    if gamma <= 0.0 or not np.isfinite((1.0 - gamma) / (2.0 * gamma)):
        lower = general
    elif gamma >= 1.0:
        lower = 0.0
    else:
        lower = 2.0 * eps * mu * gamma * moduli.rho_inv((1.0 - gamma) / (2.0 * gamma))
    return SandwichBounds(lower, upper, general, moduli.asymptotic)


def hilbert_closed_forms(eps, mu, gamma):
    """Closed-form Hilbert endpoints: (eps mu sqrt(1-g^2), 2 eps mu sqrt(1-g^2), eps mu sqrt((1-g)(1+3g)))."""
    s = np.sqrt(max(1.0 - gamma * gamma, 0.0))
    return eps * mu * s, 2.0 * eps * mu * s, eps * mu * np.sqrt(max((1.0 - gamma) * (1.0 + 3.0 * gamma), 0.0))


# ---------------------------------------------------------------- diameter oracle

@dataclass
class AscentResult:
    value: float
    pair: tuple = field(repr=False)
    restarts: int = ASCENT_RESTARTS


def ascent_diameter(P, w, eps=None, restarts=ASCENT_RESTARTS, steps=ASCENT_STEPS, seed=0):
    """Certified lower bound on diam(K_w) in a HILBERT ambient.

    K_w is parametrized as x0 + {K s : ||C s|| <= r} in whitened coordinates,
    where x0 is the point of the coset closest to V. Each restart runs a
    projected ascent of ||s|| / ||C s|| on the unit sphere, and the best pair
    (x0 + s, x0 - s) on the boundary is returned after a membership check.
    """
    sp = P.space
    if not (sp.kind is NormKind.HILBERT or sp.p == 2.0):
        raise PreconditionError("the ascent oracle needs a HILBERT ambient")
    eps = P.eps if eps is None else float(eps)
    M, V = P.M, P.V
    w = np.asarray(w, dtype=float).ravel()
    sw = np.sqrt(sp.weights)
    Rt = M.rows / sw
    xp = np.linalg.lstsq(Rt, w, rcond=None)[0]
    K = np.linalg.svd(Rt)[2][M.m:].T
    UV = np.linalg.qr(sw[:, None] * V.basis)[0]
    a = xp - UV @ (UV.T @ xp)
    C = K - UV @ (UV.T @ K)
    t0 = np.linalg.lstsq(C, -a, rcond=None)[0]
    x0 = xp + K @ t0
    E = float(np.linalg.norm(a + C @ t0))
    if E > eps * (1 + 1e-12):
        raise PreconditionError("K_w is empty")
    r = np.sqrt(max(eps * eps - E * E, 0.0))
    if K.shape[1] == 0 or r == 0.0:
        x = x0 / sw
        return AscentResult(0.0, (x, x), restarts)
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((K.shape[1], restarts))
    U /= np.linalg.norm(U, axis=0)
    CtC = C.T @ C
    step = 1.0 / max(np.linalg.norm(CtC, 2), 1e-300)
    for _ in range(steps):
        U = U - step * (CtC @ U)
        U /= np.linalg.norm(U, axis=0)
    cu = np.linalg.norm(C @ U, axis=0)
    ratio = np.where(cu > 0, 1.0 / np.maximum(cu, 1e-300), np.inf)
    j = int(np.argmax(ratio))
    s = r * U[:, j] / cu[j]
    x = (x0 + K @ s) / sw
    y = (x0 - K @ s) / sw
    # certificate check: both endpoints lie in K_w
    for z in (x, y):
        if np.max(np.abs(M.rows @ z - w)) > 1e-8 * max(1.0, np.max(np.abs(w))):
            raise StructuralError("ascent certificate violates the data")
        zt = z * sw
        if np.linalg.norm(zt - UV @ (UV.T @ zt)) > eps * (1 + 1e-9) + 1e-12:
            raise StructuralError("ascent certificate leaves the model class")
    return AscentResult(float(np.sqrt(np.sum(sp.weights * (x - y) ** 2))), (x, y), restarts)


@dataclass
class SandwichRow:
    gamma: float
    mu: float
    lower: float
    oracle: float
    upper: float
    passed: bool
    regime: str

    def to_dict(self):
        return {"gamma": self.gamma, "mu": self.mu, "lower": self.lower, "oracle": self.oracle,
                "upper": self.upper, "pass": bool(self.passed), "regime": self.regime}


def diameter_sandwich_check(P, w, oracle_diam=None, eps=None, slack=1e-6):
    """Check lower <= oracle_diam <= upper for diam(K_w), plus lower <= upper."""
    eps = P.eps if eps is None else float(eps)
    g = gamma_of_Kw(P, w, eps)
    if g.status != "OK":
        raise PreconditionError("K_w is empty (gamma > 1)")
    mods = moduli_for(P.space)
    mu = P.mu_N_V.value
    b = sandwich_bounds(eps, mu, g.value, mods)
    if oracle_diam is None:
        oracle_diam = ascent_diameter(P, w, eps).value
    ok_up = oracle_diam <= b.upper + slack
    ok_lo = oracle_diam >= b.lower - slack
    passed = ok_up and ok_lo and b.lower <= b.upper + slack
    regime = "asymptotic" if b.asymptotic else "exact"
    return SandwichRow(g.value, mu, b.lower, oracle_diam, b.upper, bool(passed), regime)


def lemma_convexity_check(moduli, x, y, eps, weights=None):
    """Slack of ||x+y|| <= 2 eps [1 - delta(||x-y|| / eps)] for ||x||, ||y|| <= eps (HILBERT)."""
    wt = np.ones(len(x)) if weights is None else weights
    n = lambda v: float(np.sqrt(np.sum(wt * v * v)))
    e = min(n(x - y) / eps, 2.0)
    return 2.0 * eps * (1.0 - moduli.delta(e)) - n(x + y)


def lemma_smoothness_check(moduli, u0, u1, eps, weights=None):
    """Slack of ||u0-u1|| >= 2 gamma eps rho^{-1}((1-gamma)/(2 gamma)) where gamma eps is the segment minimum."""
    wt = np.ones(len(u0)) if weights is None else weights
    d = u0 - u1
    dd = float(np.sum(wt * d * d))
    lam = 0.0 if dd == 0.0 else float(np.clip(np.sum(wt * u1 * (u1 - u0)) / dd, 0.0, 1.0))
    seg = lam * u0 + (1.0 - lam) * u1
    gamma = float(np.sqrt(np.sum(wt * seg * seg))) / eps
    if gamma <= 0.0:
        return np.inf
    bound = 2.0 * gamma * eps * moduli.rho_inv((1.0 - gamma) / (2.0 * gamma))
    return float(np.sqrt(dd)) - bound
