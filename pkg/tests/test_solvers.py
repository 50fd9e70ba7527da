import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog, minimize

from recov.errors import SolverError
from recov.solvers import (LinearProgram, LPStatus, least_distance, least_squares, min_norm_point,
                           minimize_pnorm, require_optimal, solve_lp)


def _scipy(c, A_ub, b_ub, A_eq=None, b_eq=None, bounds=(0, None)):
    return linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")


@given(st.integers(0, 10_000), st.integers(2, 7), st.integers(1, 8))
def test_lp_matches_highs_on_random_bounded_problems(seed, n, k):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((k, n))
    x0 = rng.uniform(0, 1, n)
    b = A @ x0 + rng.uniform(0, 1, k)
    c = rng.standard_normal(n)
    lp = LinearProgram.from_parts(c, A_ub=A, b_ub=b, lower=0.0, upper=3.0)
    rep = solve_lp(lp)
    ref = _scipy(c, A, b, bounds=(0, 3))
    assert rep.optimal
    assert rep.objective_value == pytest.approx(ref.fun, abs=1e-7)
    assert np.all(A @ rep.solution <= b + 1e-8)


@pytest.mark.parametrize("dualize", [True, False, "auto"])
def test_routes_agree_with_equalities_and_free_variables(rng, backend, dualize):
    n, k = 6, 4
    A_eq = rng.standard_normal((2, n))
    A_ub = rng.standard_normal((k, n))
    x0 = rng.standard_normal(n)
    b_eq = A_eq @ x0
    b_ub = A_ub @ x0 + 1.0
    c = rng.standard_normal(n)
    lp = LinearProgram.from_parts(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, lower=-5.0, upper=5.0)
    rep = solve_lp(lp, dualize=dualize)
    ref = _scipy(c, A_ub, b_ub, A_eq, b_eq, bounds=(-5, 5))
    assert rep.objective_value == pytest.approx(ref.fun, abs=1e-7)


def test_beale_cycling_example_terminates(backend):
    # classic degenerate LP on which textbook Dantzig pricing cycles
    c = np.array([-0.75, 150.0, -0.02, 6.0])
    A = np.array([[0.25, -60.0, -0.04, 9.0],
                  [0.5, -90.0, -0.02, 3.0],
                  [0.0, 0.0, 1.0, 0.0]])
    b = np.array([0.0, 0.0, 1.0])
    rep = solve_lp(LinearProgram.from_parts(c, A_ub=A, b_ub=b), dualize=False)
    assert rep.optimal
    assert rep.objective_value == pytest.approx(-0.05, abs=1e-12)
    assert rep.iterations < 50


def test_infeasible_and_unbounded_are_reported(backend):
    inf = solve_lp(LinearProgram.from_parts([1.0, 1.0], A_ub=[[1.0, 1.0]], b_ub=[-1.0]))
    assert inf.status is LPStatus.INFEASIBLE
    unb = solve_lp(LinearProgram.from_parts([-1.0, 0.0], A_ub=[[0.0, 1.0]], b_ub=[1.0]), dualize=False)
    assert unb.status is LPStatus.UNBOUNDED
    with pytest.raises(SolverError):
        require_optimal(inf)


def test_optimality_certificates_are_tight(rng):
    A = rng.standard_normal((5, 4))
    b = A @ rng.uniform(0, 1, 4) + 0.5
    rep = solve_lp(LinearProgram.from_parts(rng.standard_normal(4), A_ub=A, b_ub=b, lower=0, upper=2))
    assert rep.primal_residual <= 1e-9
    assert abs(rep.duality_gap) <= 1e-8


def test_warm_start_reuses_basis_and_gives_same_optimum(rng):
    A = rng.standard_normal((8, 5))
    b = A @ rng.uniform(0, 1, 5) + 1.0
    lp = LinearProgram.from_parts(rng.standard_normal(5), A_ub=A, b_ub=b, lower=-1, upper=1)
    first = solve_lp(lp, dualize=False)
    lp2 = LinearProgram.from_parts(lp.c + 0.01 * rng.standard_normal(5), A_ub=A, b_ub=b, lower=-1, upper=1)
    warm = solve_lp(lp2, warm_start=first.basis_state, dualize=False)
    cold = solve_lp(lp2, dualize=False)
    assert warm.objective_value == pytest.approx(cold.objective_value, abs=1e-10)
    assert warm.iterations <= cold.iterations


def test_weighted_least_squares_matches_normal_equations(rng):
    A = rng.standard_normal((20, 4))
    b = rng.standard_normal(20)
    w = rng.uniform(0.5, 2.0, 20)
    x = least_squares(A, b, weights=w)
    ref = np.linalg.solve(A.T @ (w[:, None] * A), A.T @ (w * b))
    assert np.allclose(x, ref, atol=1e-12)


@pytest.mark.parametrize("p", [1.5, 3.0, 6.0])
def test_pnorm_fit_matches_generic_optimizer(rng, p):
    A = rng.standard_normal((15, 3))
    b = rng.standard_normal(15)
    z = minimize_pnorm(A, b, p)
    f = lambda v: np.sum(np.abs(b - A @ v) ** p)
    ref = minimize(f, np.zeros(3), method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
    assert f(z) <= ref.fun + 1e-8


def test_least_distance_and_min_norm_point(rng):
    G = np.eye(2)
    h = np.array([1.0, 2.0])
    assert np.allclose(least_distance(G, h), [1.0, 2.0], atol=1e-12)
    x = min_norm_point(A_ub=-np.eye(2), b_ub=-np.array([1.0, 2.0]), n=2)
    assert np.allclose(x, [1.0, 2.0], atol=1e-10)
    x = min_norm_point(A_eq=[[1.0, 1.0]], b_eq=[2.0], n=2)
    assert np.allclose(x, [1.0, 1.0], atol=1e-10)


def test_pnorm_fit_converges_quickly_for_large_p():
    # regression: plain reweighting converged linearly for p > 2 on near-interpolating data
    A = np.column_stack([np.ones(6), np.linspace(-5 / 6, 5 / 6, 6)])
    b = np.array([0.2720921, -0.28412018, -0.07248264, -0.32459681, -0.24610239, 0.00859165])
    for p in (3.0, 4.0, 8.0):
        _, info = minimize_pnorm(A, b, p, full_output=True)
        assert info.converged and info.iterations <= 30
