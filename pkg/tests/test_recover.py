import numpy as np
import pytest
from hypothesis import given, strategies as st

from recov.approx import ApproxMap
from recov.errors import StandingAssumptionError, StructuralError
from recov.lift import LiftKind, make_lifting
from recov.measure import apply, make_measurements
from recov.recover import RecoveryProblem, certify, default_pipeline, recover, recover_into_V
from recov.spaces import Space, Subspace, dist_to_subspace, make_subspace_presets, norm

from conftest import random_instance


def hilbert_closed_form(M, V, w):
    """Generalized least squares in the data metric plus the Riesz-representer correction."""
    wt = M.space.weights
    Phi = M.rows.T / wt[:, None]
    G = M.rows @ Phi
    Z = M.rows @ V.basis
    Gi = np.linalg.inv(G)
    c = np.linalg.solve(Z.T @ Gi @ Z, Z.T @ Gi @ w)
    return V.basis @ c + Phi @ (Gi @ (w - Z @ c))


def pipelines():
    """(label, problem) pairs covering every default pipeline."""
    rng = np.random.default_rng(5)
    out = []
    sp = Space.interval(-np.pi, np.pi, 96, "SUP", "periodic")
    out.append(("sup-point", RecoveryProblem(make_subspace_presets("TRIG(1)", sp),
                                             make_measurements("POINT_EVAL", {"m": 8}, sp), 0.1)))
    _, V, M = random_instance(rng, 9, 2, 4, "SUP")
    out.append(("sup-general", RecoveryProblem(V, M, 0.1)))
    spl = Space.interval(0, 1, 64, "L1")
    Vr = Subspace(spl, np.sign(np.sin(4 * np.pi * spl.nodes)))
    out.append(("l1-rademacher", RecoveryProblem(Vr, make_measurements("RADEMACHER", {"m": 4}, spl), 0.1)))
    _, V, M = random_instance(rng, 9, 2, 4, "HILBERT")
    out.append(("hilbert", RecoveryProblem(V, M, 0.1)))
    spp = Space.interval(0, 1, 24, "LP(3)")
    out.append(("lp3-avg", RecoveryProblem(make_subspace_presets("POLY(1)", spp),
                                           make_measurements("DISJOINT_AVG", {"m": 6}, spp), 0.1)))
    return out


PIPELINES = pipelines()


@pytest.mark.parametrize("label,P", PIPELINES, ids=[p[0] for p in PIPELINES])
def test_admissibility_and_model_contract(label, P, rng):
    for _ in range(15):
        x = rng.standard_normal(P.space.N)
        rep = recover(P, apply(P.M, x))
        assert rep.data_residual <= 1e-8
        d = dist_to_subspace(P.space, x, P.V)[0]
        assert rep.model_distance <= rep.lam * rep.lift_norm * d * (1 + 1e-7) + 1e-8


@pytest.mark.parametrize("label,P", PIPELINES, ids=[p[0] for p in PIPELINES])
def test_exact_on_the_model(label, P, rng):
    v = P.V.basis @ rng.standard_normal(P.V.dim)
    rep = recover(P, apply(P.M, v))
    assert norm(P.space, rep.reconstruction.values - v) <= 1e-9 * max(1.0, norm(P.space, v))
    assert all(r.passed for r in certify(P, rep, v))


@given(st.integers(0, 10_000))
def test_hilbert_matches_closed_form(seed):
    rng = np.random.default_rng(seed)
    sp = Space.interval(0, 1, 10, "HILBERT", "closed")
    V = Subspace(sp, rng.standard_normal((10, 2)))
    M = make_measurements("GENERAL", {"rows": rng.standard_normal((4, 10))}, sp)
    P = RecoveryProblem(V, M)
    w = rng.standard_normal(4)
    assert np.max(np.abs(recover(P, w).reconstruction.values - hilbert_closed_form(M, V, w))) <= 1e-10


def test_trig_error_bound():
    sp = Space.interval(-np.pi, np.pi, 420, "SUP", "periodic")
    V = make_subspace_presets("TRIG(1)", sp)
    P = RecoveryProblem(V, make_measurements("POINT_EVAL", {"m": 6}, sp), 1.0)
    rng = np.random.default_rng(3)
    t = sp.nodes
    for _ in range(5):
        a = rng.standard_normal(6)
        f = a[0] + a[1] * np.cos(t) + a[2] * np.sin(2 * t) + a[3] * np.abs(np.sin(t)) + a[4] * np.cos(3 * t)
        rep = recover(P, apply(P.M, f))
        err = norm(sp, rep.reconstruction.values - f)
        assert err <= 16 * dist_to_subspace(sp, f, V)[0] + 1e-8
        assert all(r.passed for r in certify(P, rep, f) if r.check != "membership in K_w(lam*|Delta|*eps, V)")


def test_into_V_variant_stays_in_V(rng):
    _, V, M = random_instance(rng, 8, 2, 4, "SUP")
    P = RecoveryProblem(V, M, 0.5)
    rep = recover_into_V(P, rng.standard_normal(4))
    assert dist_to_subspace(P.space, rep.reconstruction.values, V)[0] <= 1e-9


def test_bounds_scale_with_eps(rng):
    _, V, M = random_instance(rng, 8, 2, 4, "SUP")
    P = RecoveryProblem(V, M, 0.5)
    rep = recover(P, rng.standard_normal(4))
    assert rep.bound_global == pytest.approx(4 * rep.lam * rep.lift_norm * 0.5 * P.mu_N_V.upper)
    assert rep.to_dict()["mu_N_V"]["value"] == pytest.approx(P.mu_N_V.value)


def test_default_pipeline_kinds():
    kinds = {label: default_pipeline(P)[1].kind for label, P in PIPELINES}
    assert kinds["l1-rademacher"] is LiftKind.RIESZ_PRODUCT
    assert kinds["hilbert"] is LiftKind.ORTHONORMAL
    assert kinds["sup-point"] is LiftKind.DUAL_BASIS


def test_problem_validation(rng):
    sp = Space.sequence(3)
    V = make_subspace_presets("COORDINATE(2)", sp)
    M = make_measurements("POINT_EVAL", {"indices": [0, 1]}, sp)
    with pytest.raises(StandingAssumptionError):
        RecoveryProblem(V, M)
    V0 = make_subspace_presets("COORDINATE(0)", sp)
    with pytest.raises(StructuralError):
        RecoveryProblem(V0, M, eps=-1.0)
    P = RecoveryProblem(V0, M)
    other = make_measurements("POINT_EVAL", {"indices": [0, 1]}, sp)
    with pytest.raises(StructuralError):
        recover(P, [1.0, 0.0], Lam=ApproxMap(other, V0), D=make_lifting(other, LiftKind.DUAL_BASIS))
