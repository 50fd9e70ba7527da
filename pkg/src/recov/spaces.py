"""Grid-discretized normed spaces, their elements, and model subspaces."""

import re
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import StructuralError
from .solvers import LinearProgram, minimize_pnorm, least_squares, require_optimal, solve_lp


class NormKind(Enum):
    SUP = "SUP"
    LP = "LP"
    HILBERT = "HILBERT"


def parse_norm_kind(spec):
    """Parse 'SUP', 'HILBERT', 'L1', 'LP(3)' or 'LP(inf)' into (NormKind, p)."""
    s = str(spec).strip().upper().replace(" ", "")
    if s in ("SUP", "LINF", "LP(INF)"):
        return NormKind.SUP, np.inf
    if s in ("HILBERT", "L2H"):
        return NormKind.HILBERT, 2.0
    if s == "L1":
        return NormKind.LP, 1.0
    m = re.fullmatch(r"LP\(([0-9.eE+-]+)\)", s)
    if m:
        p = float(m.group(1))
        if not (1.0 <= p < np.inf):
            raise StructuralError(f"LP(p) needs 1 <= p < inf, got {p}")
        return NormKind.LP, p
    raise StructuralError(f"unknown norm kind {spec!r}")


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Space:
    """A normed space on N grid nodes.

    ``weights`` are quadrature weights (all ones for sequence spaces). For
    HILBERT the norm is the weighted Euclidean norm with inner product
    sum_i w_i x_i y_i.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: NormKind
    p: float = np.inf
    domain: tuple = None

    def __post_init__(self):
        nodes = _readonly(self.nodes).ravel()
        weights = _readonly(self.weights).ravel()
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.size < 1:
            raise StructuralError("a space needs at least one node")
        if weights.size != nodes.size:
            raise StructuralError("weights and nodes must have the same length")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise StructuralError("quadrature weights must be positive")
        if self.domain is not None:
            a, b = map(float, self.domain)
            object.__setattr__(self, "domain", (a, b))
            if nodes.size > 1 and np.any(np.diff(nodes) <= 0):
                raise StructuralError("nodes must be strictly increasing on an interval domain")
        kind = self.kind if isinstance(self.kind, NormKind) else NormKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is NormKind.SUP:
            object.__setattr__(self, "p", np.inf)
        elif kind is NormKind.HILBERT:
            object.__setattr__(self, "p", 2.0)
        elif not (1.0 <= float(self.p) < np.inf):
            raise StructuralError("LP(p) needs 1 <= p < inf")
        else:
            object.__setattr__(self, "p", float(self.p))

    @property
    def N(self):
        return self.nodes.size

    @property
    def label(self):
        if self.kind is NormKind.LP:
            return f"LP({self.p:g})"
        return self.kind.value

    @property
    def dual_exponent(self):
        """Conjugate exponent p' with 1/p + 1/p' = 1."""
        if self.p == np.inf:
            return 1.0
        if self.p == 1.0:
            return np.inf
        return self.p / (self.p - 1.0)

    @property
    def resolution(self):
        """Largest node spacing, or 1 for an abstract index set."""
        if self.domain is None or self.N < 2:
            return 1.0
        return float(np.max(np.diff(self.nodes)))

    @classmethod
    def sequence(cls, N, kind="SUP"):
        """R^N with unit weights: l_inf^N, l_p^N or l_2^N."""
        k, p = parse_norm_kind(kind)
        return cls(np.arange(N, dtype=float), np.ones(N), k, p, None)

    @classmethod
    def interval(cls, a, b, N, kind="SUP", rule="midpoint"):
        """Grid on [a, b].

        rule 'midpoint' uses cell centers with equal weights, 'periodic' uses
        a + i h for i < N (left endpoints, suited to [-pi, pi)), 'closed' uses
        N points including both endpoints with trapezoid weights.
        """
        k, p = parse_norm_kind(kind)
        a, b = float(a), float(b)
        if rule == "midpoint":
            h = (b - a) / N
            nodes = a + (np.arange(N) + 0.5) * h
            weights = np.full(N, h)
        elif rule == "periodic":
            h = (b - a) / N
            nodes = a + np.arange(N) * h
            weights = np.full(N, h)
        elif rule == "closed":
            nodes = np.linspace(a, b, N)
            h = (b - a) / max(N - 1, 1)
            weights = np.full(N, h)
            if N > 1:
                weights[0] = weights[-1] = h / 2
        else:
            raise StructuralError(f"unknown grid rule {rule!r}")
        return cls(nodes, weights, k, p, (a, b))


@dataclass(frozen=True, eq=False)
class Element:
    space: Space
    values: np.ndarray

    def __post_init__(self):
        v = _readonly(self.values).ravel()
        if v.size != self.space.N:
            raise StructuralError(f"element has {v.size} values, space has {self.space.N} nodes")
        if not np.all(np.isfinite(v)):
            raise StructuralError("element values must be finite")
        object.__setattr__(self, "values", v)


def values_of(space, x):
    """Value vector of an Element or array, checked against ``space``."""
    if isinstance(x, Element):
        if x.space is not space and x.space.N != space.N:
            raise StructuralError("element belongs to a different space")
        return x.values
    v = np.asarray(x, dtype=float)
    if v.shape[0] != space.N:
        raise StructuralError(f"vector has length {v.shape[0]}, space has {space.N} nodes")
    return v


@dataclass(frozen=True, eq=False)
class Subspace:
    """An n-dimensional subspace spanned by the columns of ``basis`` (N x n)."""

    space: Space
    basis: np.ndarray
    label: str = ""

    def __post_init__(self):
        B = np.array(self.basis, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        if B.shape[0] != self.space.N:
            raise StructuralError("basis rows must match the number of grid nodes")
        n = B.shape[1]
        if n > self.space.N:
            raise StructuralError(f"dimension {n} exceeds grid size {self.space.N}")
        if not np.all(np.isfinite(B)):
            raise StructuralError("basis must be finite")
        if n:
            _, R, piv = scipy.linalg.qr(B, mode="economic", pivoting=True)
            d = np.abs(np.diag(R))
            rank = int(np.sum(d > 1e-10 * d[0])) if d[0] > 0 else 0
            if rank < n:
                raise StructuralError(
                    f"basis columns are dependent; pivoted QR rank {rank} < {n} "
                    f"(columns {sorted(int(c) for c in piv[rank:])})")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @property
    def dim(self):
        return self.basis.shape[1]

    def element(self, c):
        return Element(self.space, self.basis @ np.asarray(c, dtype=float))

    def orthonormal_basis(self):
        """Basis orthonormal in the space's weighted inner product (whitened coordinates)."""
        sw = np.sqrt(self.space.weights)
        Q, _ = np.linalg.qr(self.basis * sw[:, None])
        return Q / sw[:, None]


# ---------------------------------------------------------------- norms

def norm(space, x):
    """Ambient norm of an Element or value vector."""
    v = values_of(space, x)
    if v.size == 0:
        return 0.0
    if space.kind is NormKind.SUP:
        return float(np.max(np.abs(v)))
    a = np.abs(v)
    top = float(a.max())
    if top == 0.0:
        return 0.0
    if space.kind is NormKind.HILBERT:
        return top * float(np.sqrt(space.weights @ (a / top) ** 2))
    return top * float((space.weights @ (a / top) ** space.p) ** (1.0 / space.p))


def dual_norm(space, rho):
    """Norm in X* of the functional x -> rho . x (rho already includes quadrature)."""
    rho = np.asarray(rho, dtype=float)
    w = space.weights
    if space.kind is NormKind.SUP:
        return float(np.sum(np.abs(rho)))
    if space.kind is NormKind.HILBERT:
        return float(np.sqrt(np.sum(rho ** 2 / w)))
    q = space.dual_exponent
    g = np.abs(rho) / w
    if q == np.inf:
        return float(np.max(g))
    top = float(g.max())
    if top == 0.0:
        return 0.0
    return top * float((w @ (g / top) ** q) ** (1.0 / q))


def inner(space, x, y):
    return float(space.weights @ (values_of(space, x) * values_of(space, y)))


# ---------------------------------------------------------------- distance

def best_approximation(space, x, B):
    """Coefficients c minimizing norm(x - B c) and the minimal value.

    ``B`` is any N x n matrix with full column rank.
    """
    x = values_of(space, x)
    B = np.asarray(B, dtype=float)
    N, n = B.shape
    if n == 0:
        return np.zeros(0), norm(space, x)
    if space.kind is NormKind.HILBERT or (space.kind is NormKind.LP and space.p == 2.0):
        c = least_squares(B, x, space.weights)
    elif space.kind is NormKind.SUP:
        # min s  s.t.  -s <= x - B c <= s
        A = np.vstack([np.hstack([-B, -np.ones((N, 1))]), np.hstack([B, -np.ones((N, 1))])])
        b = np.concatenate([-x, x])
        cost = np.zeros(n + 1)
        cost[-1] = 1.0
        lp = LinearProgram.from_parts(cost, A_ub=A, b_ub=b, lower=-np.inf, upper=np.inf)
        rep = require_optimal(solve_lp(lp), "sup-norm distance")
        c = rep.solution[:n]
    elif space.p == 1.0:
        # dual box form: max x.lam  s.t.  B^T lam = 0, |lam_i| <= w_i ; c = -multipliers
        w = space.weights
        lp = LinearProgram(-x, B.T, ("=",) * n, np.zeros(n), -w, w)
        rep = require_optimal(solve_lp(lp), "l1 distance")
        c = -rep.duals
    else:
        c = minimize_pnorm(B, x, space.p, space.weights)
    return c, norm(space, x - B @ c)


def dist_to_subspace(space, x, V):
    """Distance from x to V and a minimizer in V, as (value, Element)."""
    if V.space.N != space.N:
        raise StructuralError("subspace lives on a different space")
    c, val = best_approximation(space, x, V.basis)
    return val, Element(space, V.basis @ c)


# ---------------------------------------------------------------- presets

def parse_preset(spec):
    """'TRIG(2)' -> ('TRIG', 2); 'COORDINATE(0,3)' -> ('COORDINATE', (0, 3))."""
    if isinstance(spec, (tuple, list)) and len(spec) == 2 and isinstance(spec[0], str):
        return spec[0].upper(), spec[1]
    m = re.fullmatch(r"\s*([A-Za-z_]+)\s*\(([^)]*)\)\s*", str(spec))
    if not m:
        raise StructuralError(f"cannot parse subspace preset {spec!r}")
    kind = m.group(1).upper()
    args = [a for a in m.group(2).replace(" ", "").split(",") if a]
    if kind == "COORDINATE":
        return kind, tuple(int(a) for a in args)
    if len(args) != 1:
        raise StructuralError(f"{kind} takes one integer argument")
    return kind, int(args[0])


def trig_basis(t, n):
    cols = [np.ones_like(t)]
    for k in range(1, n + 1):
        cols += [np.cos(k * t), np.sin(k * t)]
    return np.column_stack(cols)


def make_subspace_presets(kind, space, arg=None):
    """TRIG(n), POLY(n) (Chebyshev basis) or COORDINATE(indices, 0-based)."""
    if arg is None:
        kind, arg = parse_preset(kind)
    kind = kind.upper()
    t = space.nodes
    if kind == "TRIG":
        n = int(arg)
        if 2 * n + 1 > space.N:
            raise StructuralError(f"TRIG({n}) has dimension {2 * n + 1} > N = {space.N}")
        return Subspace(space, trig_basis(t, n), f"TRIG({n})")
    if kind == "POLY":
        n = int(arg)
        if n + 1 > space.N:
            raise StructuralError(f"POLY({n}) has dimension {n + 1} > N = {space.N}")
        a, b = space.domain if space.domain is not None else (float(t.min()), float(t.max()))
        s = (2.0 * t - (a + b)) / (b - a) if b > a else np.zeros_like(t)
        return Subspace(space, np.polynomial.chebyshev.chebvander(s, n), f"POLY({n})")
    if kind == "COORDINATE":
        idx = [int(i) for i in np.atleast_1d(arg)]
        if len(idx) > space.N or any(i < 0 or i >= space.N for i in idx):
            raise StructuralError("coordinate index out of range")
        B = np.zeros((space.N, len(idx)))
        B[idx, np.arange(len(idx))] = 1.0
        return Subspace(space, B, f"COORDINATE({','.join(map(str, idx))})")
    raise StructuralError(f"unknown subspace preset {kind!r}")
