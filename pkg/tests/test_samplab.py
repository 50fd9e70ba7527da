import numpy as np
import pytest

from recov.angles import mu_V_N
from recov.errors import NoAdmissibleError, PreconditionError, StructuralError
from recov.measure import make_measurements
from recov.recover import RecoveryProblem
from recov.samplab import (NestedFamily, condition_estimate, fourier_schedule, gamma_norming,
                           l1_totality_demo, nested_family, point_schedule, preset_epsilons, select_n, sweep,
                           totality_operator)
from recov.spaces import Space, Subspace, make_subspace_presets


def test_preset_tolerances():
    e = preset_epsilons("LIP_ALPHA", 5, C=2.0, param=0.5)
    assert e[0] == 2.0 and np.all(np.diff(e) < 0)
    assert preset_epsilons("BERNSTEIN", 3, param=2.0)[-1] == pytest.approx(1 / 8)
    with pytest.raises(PreconditionError):
        preset_epsilons("BERNSTEIN", 3, param=1.0)


def test_nested_family_validation():
    sp = Space.interval(-np.pi, np.pi, 60, "SUP", "periodic")
    F = nested_family(sp, "TRIG", 3)
    assert [V.dim for V in F.spaces] == [1, 3, 5, 7]
    bad = [make_subspace_presets("TRIG(1)", sp), Subspace(sp, np.sin(2 * sp.nodes))]
    with pytest.raises(StructuralError):
        NestedFamily(bad, [1.0, 0.5])
    with pytest.raises(StructuralError):
        NestedFamily(F.spaces[:2], [0.5, 1.0])


def test_point_schedule_is_nested():
    sp = Space.interval(-np.pi, np.pi, 120, "SUP", "periodic")
    ops = point_schedule(sp, [6, 12, 24])
    for a, b in zip(ops, ops[1:]):
        assert b.params["indices"][:a.m] == a.params["indices"]
    with pytest.raises(PreconditionError):
        point_schedule(sp, [7])


def test_selection_prefers_smaller_score_and_raises_when_none():
    sp = Space.interval(-np.pi, np.pi, 120, "SUP", "periodic")
    F = nested_family(sp, "TRIG", 4, "BERNSTEIN", param=3.0)
    M = make_measurements("POINT_EVAL", {"m": 12}, sp)
    sel = select_n(F, M)
    finite = [s for s in sel.scores if np.isfinite(s)]
    assert sel.score == min(finite)
    assert F.spaces[sel.n_star].dim <= 12
    sp3 = Space.sequence(3)
    V = make_subspace_presets("COORDINATE(2)", sp3)
    M3 = make_measurements("POINT_EVAL", {"indices": [0, 1]}, sp3)
    with pytest.raises(NoAdmissibleError):
        select_n(NestedFamily([V], [1.0]), M3)


def test_gamma_norming_is_reciprocal_angle():
    sp = Space.interval(-np.pi, np.pi, 120, "SUP", "periodic")
    V = make_subspace_presets("TRIG(2)", sp)
    for m in (10, 20, 40):
        M = make_measurements("POINT_EVAL", {"m": m}, sp)
        assert gamma_norming(M, V).value * mu_V_N(M, V).value == pytest.approx(1.0, rel=1e-7)
    sph = Space.interval(-np.pi, np.pi, 64, "HILBERT", "periodic")
    Vh = make_subspace_presets("TRIG(1)", sph)
    Mh = make_measurements("FOURIER", {"m": 5}, sph)
    assert gamma_norming(Mh, Vh).value * mu_V_N(Mh, Vh).value == pytest.approx(1.0, rel=1e-8)


def test_point_sweep_angles_nonincreasing():
    sp = Space.interval(-np.pi, np.pi, 240, "SUP", "periodic")
    V = make_subspace_presets("TRIG(2)", sp)
    mus = [mu_V_N(M, V).value for M in point_schedule(sp, [15, 30, 60])]
    assert all(b <= a + 1e-9 for a, b in zip(mus, mus[1:]))


def test_fourier_sweep_converges():
    sp = Space.interval(-np.pi, np.pi, 256, "HILBERT", "periodic")
    f = np.exp(np.sin(sp.nodes))
    F = nested_family(sp, "TRIG", 12, "PROBE", probe=f)
    tab = sweep(F, fourier_schedule(sp, (0, 2, 8, 32)), f)
    assert tab.converged
    assert tab.rows[-1].actual_error <= 1e-3
    for r in tab.rows:
        assert r.actual_error <= r.bound + 1e-10
        assert r.mu * r.gamma == pytest.approx(1.0, rel=1e-6)
    assert tab.to_csv().splitlines()[0] == "m,n_of_m,mu,epsilon,bound,actual_error,gamma"


def test_condition_estimates_respect_bounds():
    sp = Space.interval(-np.pi, np.pi, 120, "HILBERT", "periodic")
    V = make_subspace_presets("TRIG(1)", sp)
    P = RecoveryProblem(V, make_measurements("FOURIER", {"m": 5}, sp))
    ce = condition_estimate(P, k=3)
    assert 0 < ce.estimate <= ce.structural_bound * (1 + 1e-4)
    sps = Space.interval(-np.pi, np.pi, 120, "SUP", "periodic")
    Ps = RecoveryProblem(make_subspace_presets("TRIG(1)", sps), make_measurements("POINT_EVAL", {"m": 6}, sps))
    ce = condition_estimate(Ps, k=3)
    assert np.isfinite(ce.estimate) and ce.estimate <= ce.structural_bound


def test_totality_demo_values():
    rows, warns = l1_totality_demo(2.0, 8, 64)
    assert not warns
    for r in rows:
        assert r.dist == pytest.approx(0.5, abs=1e-6)
        assert r.mu >= 2.0 - 1e-6
    lit, _ = l1_totality_demo(2.0, 3, 64, literal=True)
    assert all(r.dist == pytest.approx(1.0, abs=1e-6) for r in lit)
    assert totality_operator(3.0, 2, 10).m == 2
    _, warns = l1_totality_demo(2.0, 3, 4)
    assert warns
