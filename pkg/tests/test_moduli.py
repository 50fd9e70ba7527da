import numpy as np
import pytest
from hypothesis import given, strategies as st

from recov.chebgeo import build_Kw
from recov.errors import PreconditionError, StructuralError
from recov.measure import apply
from recov.moduli import (ModulusPair, ascent_diameter, diameter_sandwich_check, gamma_of_Kw,
                          hilbert_closed_forms, lemma_convexity_check, lemma_smoothness_check, moduli_for,
                          modulus, sandwich_bounds)
from recov.recover import RecoveryProblem
from recov.spaces import Space

from conftest import random_instance

H = ModulusPair()
PAIRS = [H, ModulusPair("LP_ASYMPTOTIC", 1.5), ModulusPair("LP_ASYMPTOTIC", 4.0)]


@pytest.mark.parametrize("mp", PAIRS, ids=["hilbert", "lp1.5", "lp4"])
def test_modulus_shape_invariants(mp):
    e = np.linspace(0, 2, 201)
    d = np.array([mp.delta(x) for x in e])
    assert d[0] == 0.0 and np.all(np.diff(d) >= -1e-15)
    t = np.linspace(0, 5, 201)
    r = np.array([mp.rho(x) for x in t])
    assert r[0] == 0.0 and np.all(np.diff(r) >= -1e-15)
    assert np.all(np.diff(r, 2) >= -1e-12)


@given(st.floats(0.0, 0.2), st.floats(0.0, 20.0))
def test_inverses_round_trip(y1, y2):
    y1 = min(y1, H.delta(2.0))
    assert H.delta(H.delta_inv(y1)) == pytest.approx(y1, abs=1e-10)
    assert H.rho(H.rho_inv(y2)) == pytest.approx(y2, abs=1e-10)


def test_delta_inv_saturates_at_two():
    assert H.delta_inv(1.0) == 2.0


@given(st.floats(0.0, 1.0))
def test_hilbert_sandwich_closed_forms(g):
    eps, mu = 0.7, 1.9
    b = sandwich_bounds(eps, mu, g, H)
    remark, upper, lower = hilbert_closed_forms(eps, mu, g)
    assert b.upper == pytest.approx(upper, abs=1e-9)
    if 0.0 < g < 1.0:
        assert b.lower == pytest.approx(lower, abs=1e-9)
        assert lower >= remark - 1e-12
    assert b.lower <= b.upper + 1e-12


def test_moduli_for_and_modulus_helper():
    assert moduli_for(Space.sequence(3, "HILBERT")).kind == "HILBERT_EXACT"
    assert moduli_for(Space.sequence(3, "LP(3)")).asymptotic
    with pytest.raises(PreconditionError):
        moduli_for(Space.sequence(3, "SUP"))
    assert modulus("HILBERT_EXACT", "delta", 2.0) == 1.0
    with pytest.raises(StructuralError):
        modulus("HILBERT_EXACT", "kappa", 1.0)


def test_lemma_checks_on_random_pairs(rng):
    eps = 1.3
    for _ in range(2000):
        x, y = rng.standard_normal((2, 5))
        x *= eps * rng.uniform() / np.linalg.norm(x)
        y *= eps * rng.uniform() / np.linalg.norm(y)
        assert lemma_convexity_check(H, x, y, eps) >= -1e-9
        u0, u1 = rng.standard_normal((2, 5))
        u0 *= eps / np.linalg.norm(u0)
        u1 *= eps / np.linalg.norm(u1)
        assert lemma_smoothness_check(H, u0, u1, eps) >= -1e-9


def test_ascent_oracle_matches_ellipsoid_diameter(rng):
    for _ in range(5):
        _, V, M = random_instance(rng, 5, 2, 3, "HILBERT")
        P = RecoveryProblem(V, M, 1.0)
        w = apply(M, V.basis @ rng.standard_normal(2) + 0.3 * rng.standard_normal(5))
        if gamma_of_Kw(P, w).status != "OK":
            continue
        assert ascent_diameter(P, w).value == pytest.approx(build_Kw(P, w).diameter, rel=1e-8)


def test_sandwich_rows_pass(rng):
    for _ in range(8):
        _, V, M = random_instance(rng, 5, 2, 3, "HILBERT")
        P = RecoveryProblem(V, M, 1.0)
        w = apply(M, V.basis @ rng.standard_normal(2) + 0.4 * rng.standard_normal(5))
        if gamma_of_Kw(P, w).status != "OK":
            continue
        row = diameter_sandwich_check(P, w)
        assert row.passed and row.regime == "exact"


def test_out_of_class_data(rng):
    _, V, M = random_instance(rng, 5, 1, 3, "HILBERT")
    P = RecoveryProblem(V, M, 1e-3)
    w = apply(M, rng.standard_normal(5))
    assert gamma_of_Kw(P, w).status == "OUT_OF_CLASS"
    with pytest.raises(PreconditionError):
        diameter_sandwich_check(P, w)
