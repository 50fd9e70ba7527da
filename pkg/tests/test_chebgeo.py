import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial import ConvexHull

from recov.chebgeo import (EMPTY, OK, UNBOUNDED, PolytopeSet, build_Kw, chebyshev_center_radius, diameter,
                           enumerate_vertices, miniball, restricted_radius)
from recov.errors import SizeError
from recov.measure import apply, make_measurements
from recov.recover import RecoveryProblem
from recov.spaces import Space, Subspace, make_subspace_presets

from conftest import random_instance

T = [[1, 1, 0], [1, 0, 1], [0, 1, 1]]


def test_simplex_T_sup_values(backend):
    S = PolytopeSet.from_vertices(T)
    assert diameter(S).value == pytest.approx(1.0, abs=1e-12)
    b = chebyshev_center_radius(S)
    assert b.radius == pytest.approx(0.5, abs=1e-12)
    assert np.allclose(b.center, 0.5)
    bc = restricted_radius(S)
    assert bc.radius == pytest.approx(2 / 3, abs=1e-12)
    assert np.allclose(bc.center, 2 / 3)


def test_simplex_T_other_norms():
    H = PolytopeSet.from_vertices(T, "HILBERT")
    assert chebyshev_center_radius(H).radius == pytest.approx(np.sqrt(2 / 3))
    assert diameter(H).value == pytest.approx(np.sqrt(2))
    L = PolytopeSet.from_vertices(T, "L1")
    assert diameter(L).value == pytest.approx(2.0)


def test_hrep_cube_vertices_and_status():
    A = np.vstack([np.eye(3), -np.eye(3)])
    S = PolytopeSet.from_hrep(3, A, np.ones(6))
    V = enumerate_vertices(S)
    assert V.shape == (8, 3)
    assert {tuple(v) for v in np.round(V)} == set(itertools.product([-1.0, 1.0], repeat=3))
    assert PolytopeSet.from_hrep(2, [[1, 0]], [1.0]).status == UNBOUNDED
    assert PolytopeSet.from_hrep(1, [[1.0], [-1.0]], [-1.0, 0.0]).status == EMPTY


@given(st.integers(0, 10_000))
def test_vertex_enumeration_matches_qhull(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((9, 3))
    b = np.ones(9)
    A = np.vstack([A, np.eye(3), -np.eye(3)])
    b = np.concatenate([b, 3 * np.ones(6)])
    S = PolytopeSet.from_hrep(3, A, b)
    V = enumerate_vertices(S)
    from scipy.spatial import HalfspaceIntersection
    hs = HalfspaceIntersection(np.hstack([A, -b[:, None]]), np.zeros(3))
    ref = hs.intersections[ConvexHull(hs.intersections).vertices]
    assert V.shape[0] == ref.shape[0]
    for v in ref:
        assert np.min(np.max(np.abs(V - v), axis=1)) <= 1e-8


@given(st.integers(0, 10_000))
def test_miniball_encloses_and_is_tight(seed):
    rng = np.random.default_rng(seed)
    P = rng.standard_normal((15, 3))
    c, r = miniball(P)
    d = np.linalg.norm(P - c, axis=1)
    assert np.all(d <= r * (1 + 1e-9))
    assert np.sum(d >= r * (1 - 1e-9)) >= 2


@given(st.integers(0, 10_000))
def test_radius_relations(seed):
    rng = np.random.default_rng(seed)
    S = PolytopeSet.from_vertices(rng.standard_normal((6, 3)))
    d, r, rc = diameter(S).value, chebyshev_center_radius(S).radius, restricted_radius(S).radius
    assert d / 2 - 1e-9 <= r <= rc + 1e-9
    assert rc <= d + 1e-9


def test_embedded_example_Kw(backend):
    sp = Space.sequence(4, "SUP")
    V = make_subspace_presets("COORDINATE(0)", sp)
    M = make_measurements("GENERAL", {"rows": [[1, 0, 0, 0], [0, 1, 1, 1]]}, sp)
    P = RecoveryProblem(V, M, 1.0)
    K = build_Kw(P, [0, 2])
    assert K.status == OK
    assert diameter(K).value == pytest.approx(1.0, abs=1e-9)
    assert chebyshev_center_radius(K).radius == pytest.approx(0.5, abs=1e-9)
    assert restricted_radius(K).radius == pytest.approx(2 / 3, abs=1e-9)
    assert build_Kw(P, [0, 10]).status == EMPTY


@pytest.mark.parametrize("kind", ["SUP", "HILBERT"])
def test_radius_on_model_equals_eps_mu(rng, kind):
    for _ in range(4):
        sp, V, M = random_instance(rng, 6, 2, 3, kind)
        P = RecoveryProblem(V, M, 0.7)
        K = build_Kw(P, apply(M, V.basis @ rng.standard_normal(2)))
        assert chebyshev_center_radius(K).radius == pytest.approx(0.7 * P.mu_N_V.value, rel=1e-6)


def test_Kw_size_guard():
    sp = Space.sequence(13, "SUP")
    V = make_subspace_presets("COORDINATE(0)", sp)
    M = make_measurements("POINT_EVAL", {"indices": [0, 1]}, sp)
    with pytest.raises(SizeError):
        build_Kw(RecoveryProblem(V, M, 1.0), [0, 0])


def test_sampled_diameter_is_lower_bound(rng):
    S = PolytopeSet.from_vertices(rng.standard_normal((8, 3)))
    assert diameter(S, "sampled", samples=64).value <= diameter(S).value + 1e-12
