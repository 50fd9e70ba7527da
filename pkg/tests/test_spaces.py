import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from recov.errors import StructuralError
from recov.spaces import (NormKind, Space, Subspace, dist_to_subspace, dual_norm, make_subspace_presets,
                          norm, parse_norm_kind, parse_preset)


@pytest.mark.parametrize("spec,kind,p", [("SUP", NormKind.SUP, np.inf), ("HILBERT", NormKind.HILBERT, 2.0),
                                         ("L1", NormKind.LP, 1.0), ("LP(3)", NormKind.LP, 3.0),
                                         ("lp(inf)", NormKind.SUP, np.inf)])
def test_parse_norm_kind(spec, kind, p):
    assert parse_norm_kind(spec) == (kind, p)


@pytest.mark.parametrize("bad", ["L0", "LP(0.5)", "foo"])
def test_parse_norm_kind_rejects(bad):
    with pytest.raises(StructuralError):
        parse_norm_kind(bad)


def test_grid_rules_integrate_constants():
    for rule in ("midpoint", "periodic", "closed"):
        sp = Space.interval(0.0, 2.0, 11, "L1", rule)
        assert sp.weights.sum() == pytest.approx(2.0)


@given(st.integers(0, 10_000), st.sampled_from(["SUP", "HILBERT", "L1", "LP(3)"]))
def test_norm_matches_weighted_formula_and_dual_pairing(seed, kind):
    rng = np.random.default_rng(seed)
    sp = Space.interval(0, 1, 9, kind)
    x = rng.standard_normal(9)
    w = sp.weights
    ref = {"SUP": np.max(np.abs(x)), "HILBERT": np.sqrt(w @ x ** 2), "L1": w @ np.abs(x),
           "LP(3)": (w @ np.abs(x) ** 3) ** (1 / 3)}[kind]
    assert norm(sp, x) == pytest.approx(ref, rel=1e-13)
    rho = rng.standard_normal(9)
    # Hoelder: |rho.x| <= ||rho||_* ||x||
    assert abs(rho @ x) <= dual_norm(sp, rho) * norm(sp, x) * (1 + 1e-12)


def test_norm_is_overflow_safe():
    sp = Space.sequence(3, "HILBERT")
    assert norm(sp, [1e200, 1e200, 0.0]) == pytest.approx(np.sqrt(2) * 1e200)


def test_sup_distance_matches_linprog(rng):
    sp = Space.sequence(12, "SUP")
    B = rng.standard_normal((12, 3))
    V = Subspace(sp, B)
    x = rng.standard_normal(12)
    d, e = dist_to_subspace(sp, x, V)
    A = np.vstack([np.hstack([-B, -np.ones((12, 1))]), np.hstack([B, -np.ones((12, 1))])])
    ref = linprog(np.r_[np.zeros(3), 1.0], A_ub=A, b_ub=np.r_[-x, x], bounds=[(None, None)] * 4)
    assert d == pytest.approx(ref.fun, abs=1e-9)
    assert norm(sp, x - e.values) == pytest.approx(d, abs=1e-9)


def test_l1_distance_matches_linprog(rng):
    sp = Space.interval(0, 1, 10, "L1")
    B = rng.standard_normal((10, 2))
    x = rng.standard_normal(10)
    d, _ = dist_to_subspace(sp, x, Subspace(sp, B))
    w = sp.weights
    # min w.u  s.t.  -u <= x - B c <= u
    A = np.vstack([np.hstack([-B, -np.eye(10)]), np.hstack([B, -np.eye(10)])])
    ref = linprog(np.r_[0, 0, w], A_ub=A, b_ub=np.r_[-x, x], bounds=[(None, None)] * 2 + [(0, None)] * 10)
    assert d == pytest.approx(ref.fun, abs=1e-9)


def test_hilbert_distance_is_projection(rng):
    sp = Space.sequence(8, "HILBERT")
    B = rng.standard_normal((8, 3))
    x = rng.standard_normal(8)
    d, _ = dist_to_subspace(sp, x, Subspace(sp, B))
    Q = np.linalg.qr(B)[0]
    assert d == pytest.approx(np.linalg.norm(x - Q @ (Q.T @ x)), rel=1e-12)


def test_presets_and_their_errors():
    sp = Space.interval(-np.pi, np.pi, 20, "SUP", "periodic")
    assert make_subspace_presets("TRIG(2)", sp).dim == 5
    assert make_subspace_presets("POLY(3)", sp).dim == 4
    assert make_subspace_presets("COORDINATE(0,3)", sp).dim == 2
    assert parse_preset("COORDINATE(1, 2)") == ("COORDINATE", (1, 2))
    with pytest.raises(StructuralError):
        make_subspace_presets("TRIG(10)", sp)
    with pytest.raises(StructuralError):
        make_subspace_presets("COORDINATE(25)", sp)


def test_dependent_basis_is_rejected():
    sp = Space.sequence(4)
    with pytest.raises(StructuralError, match="dependent"):
        Subspace(sp, [[1, 2], [1, 2], [0, 0], [1, 2]])
