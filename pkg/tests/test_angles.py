import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from recov.angles import angle_report, mu_N_V, mu_subspaces, mu_V_N, radius_bounds, theta
from recov.measure import apply, m_norm, make_measurements
from recov.spaces import Space, Subspace, dist_to_subspace, make_subspace_presets, norm

from conftest import random_instance


def _nullspace(M):
    return scipy.linalg.null_space(M.rows)


def test_hilbert_angles_match_principal_angle_oracle(rng):
    for _ in range(10):
        sp, V, M = random_instance(rng, 7, 2, 4, "HILBERT")
        th = scipy.linalg.subspace_angles(V.basis, _nullspace(M))
        ref = 1.0 / np.sin(th.min())
        assert mu_V_N(M, V).value == pytest.approx(ref, rel=1e-8)
        assert mu_N_V(M, V).value == pytest.approx(ref, rel=1e-8)


def test_hilbert_orthogonal_null_space_gives_one():
    sp = Space.sequence(6, "HILBERT")
    V = make_subspace_presets("COORDINATE(0,1)", sp)
    M = make_measurements("GENERAL", {"rows": np.eye(6)[:3]}, sp)
    assert mu_N_V(M, V).value == pytest.approx(1.0)
    assert mu_V_N(M, V).value == pytest.approx(1.0)


def test_sup_one_dimensional_exact_ratio(rng):
    for _ in range(10):
        sp, V, M = random_instance(rng, 6, 1, 3, "SUP")
        v = V.basis[:, 0]
        assert mu_V_N(M, V).value == pytest.approx(norm(sp, v) / m_norm(M, apply(M, v)), rel=1e-7)


@given(st.integers(0, 10_000))
def test_sup_sweep_dominates_sampled_ratios_and_reproduces_witness(seed):
    rng = np.random.default_rng(seed)
    sp, V, M = random_instance(rng, 7, 2, 4, "SUP")
    mu = mu_V_N(M, V)
    w = mu.witness
    assert norm(sp, w) / m_norm(M, apply(M, w)) == pytest.approx(mu.value, rel=1e-6)
    for c in rng.standard_normal((30, 2)):
        v = V.basis @ c
        assert norm(sp, v) / m_norm(M, apply(M, v)) <= mu.value * (1 + 1e-7)
    K = _nullspace(M)
    nu = mu_N_V(M, V)
    for a in rng.standard_normal((30, K.shape[1])):
        eta = K @ a
        assert norm(sp, eta) / dist_to_subspace(sp, eta, V)[0] <= nu.value * (1 + 1e-7)


@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(1, 4))
def test_angle_lemma_on_random_pairs(seed, kx, ky):
    rng = np.random.default_rng(seed)
    sp = Space.sequence(8, "SUP")
    X = rng.standard_normal((8, kx))
    Y = rng.standard_normal((8, ky))
    a, b = mu_subspaces(sp, X, Y), mu_subspaces(sp, Y, X)
    assert a >= 1.0 - 1e-9
    assert a <= 1.0 + b + 1e-7
    assert 1.0 + b <= 2.0 * b + 1e-7


@given(st.integers(0, 10_000))
def test_mu_sandwich_between_half_and_double(seed):
    rng = np.random.default_rng(seed)
    _, V, M = random_instance(rng, 7, 2, 4, "SUP")
    r = angle_report(M, V)
    assert 0.5 * r.mu_V_N.value <= r.mu_N_V.value + 1e-7
    assert r.mu_N_V.value <= 1.0 + r.mu_V_N.value + 1e-7
    assert r.mu_N_V.value <= 2.0 * r.mu_V_N.value + 1e-7


def test_coordinate_example_is_isometric():
    sp = Space.sequence(3, "SUP")
    V = make_subspace_presets("COORDINATE(0)", sp)
    M = make_measurements("POINT_EVAL", {"indices": [0, 1]}, sp)
    assert mu_V_N(M, V).value == pytest.approx(1.0)


@pytest.mark.parametrize("m", [6, 8, 12])
def test_sphere_demo_closed_form(m):
    sp = Space.interval(0, 2 * np.pi, 720, "SUP", "periodic")
    V = Subspace(sp, np.column_stack([np.cos(sp.nodes), np.sin(sp.nodes)]))
    M = make_measurements("POINT_EVAL", {"m": m}, sp)
    assert mu_V_N(M, V).value == pytest.approx(1.0 / np.cos(np.pi / m), rel=1e-9)


def test_rank_deficiency_gives_infinite_flag():
    sp = Space.sequence(3, "SUP")
    V = make_subspace_presets("COORDINATE(2)", sp)
    M = make_measurements("POINT_EVAL", {"indices": [0, 1]}, sp)
    mu = mu_V_N(M, V)
    assert mu.infinite and mu.to_dict()["value"] == "INFINITE"
    assert np.allclose(apply(M, mu.witness), 0)
    assert theta(mu) == 0.0
    assert radius_bounds(M, V, 1.0, mu=mu).infinite


def test_radius_bounds_cases(rng):
    _, V, M = random_instance(rng, 6, 1, 3, "SUP")
    mu = mu_N_V(M, V).value
    b = radius_bounds(M, V, 0.5)
    assert (b.lower, b.upper) == pytest.approx((0.5 * mu, mu))
    v = V.basis[:, 0]
    b = radius_bounds(M, V, 0.5, w=apply(M, v))
    assert b.exact and b.lower == pytest.approx(0.5 * mu) and b.upper == pytest.approx(0.5 * mu)
    assert radius_bounds(M, V, 0.0).upper == 0.0


def test_lp_ambient_gives_valid_interval(rng):
    sp, V, M = random_instance(rng, 6, 2, 3, "LP(3)")
    mu = mu_V_N(M, V)
    assert 1.0 <= mu.lower <= mu.upper
    for c in rng.standard_normal((20, 2)):
        v = V.basis @ c
        assert norm(sp, v) / m_norm(M, apply(M, v)) <= mu.upper * (1 + 1e-9)
