import numpy as np
import pytest

from recov import _core_py, kernels

cy = pytest.importorskip("recov._core")


def test_backend_flag_reports_compiled_core():
    assert kernels.BACKEND in ("python", "cython")
    assert kernels.get_backend("python") is _core_py


@pytest.mark.parametrize("code,p", [(0, 1.0), (1, 1.0), (1, 3.0), (2, 2.0)])
def test_cube_vertex_max_parity(rng, code, p):
    P = rng.standard_normal((7, 6))
    w = rng.uniform(0.5, 1.5, 7)
    a = _core_py.cube_vertex_max(P, w, code, p)
    b = cy.cube_vertex_max(P, w, code, p)
    assert a[0] == pytest.approx(b[0], rel=1e-13)
    assert a[1] == b[1]


def test_cube_vertex_max_against_enumeration(rng):
    P = rng.standard_normal((5, 4))
    w = np.ones(5)
    S = _core_py.sign_patterns(4)
    brute = max(np.max(np.abs(P @ s)) for s in S)
    assert _core_py.cube_vertex_max(P, w, 0, 1.0)[0] == pytest.approx(brute, rel=1e-14)


def test_riesz_product_parity(rng):
    signs = np.where(rng.uniform(size=(5, 32)) < 0.5, -1, 1).astype(np.int8)
    w = rng.uniform(-1, 1, 5)
    assert np.allclose(_core_py.riesz_product(signs, w), cy.riesz_product(signs, w), atol=1e-15)


def test_greedy_cover_parity(rng):
    C = rng.standard_normal((200, 3))
    a = _core_py.greedy_cover(C, 0.4, 500)
    b = cy.greedy_cover(C, 0.4, 500)
    assert list(a[0]) == list(b[0])
    assert a[1] == pytest.approx(b[1])


@pytest.mark.parametrize("code,p", [(0, 1.0), (1, 1.0), (2, 2.0)])
def test_pairwise_max_dist_parity(rng, code, p):
    P = rng.standard_normal((40, 4))
    w = rng.uniform(0.5, 1.5, 4)
    a = _core_py.pairwise_max_dist(P, w, code, p)
    b = cy.pairwise_max_dist(P, w, code, p)
    assert a[0] == pytest.approx(b[0], rel=1e-14)
    assert tuple(a[1]) == tuple(b[1])


def test_readonly_inputs_are_accepted():
    P = np.eye(3)
    P.setflags(write=False)
    w = np.ones(3)
    w.setflags(write=False)
    assert cy.pairwise_max_dist(P, w, 0, 1.0)[0] == pytest.approx(1.0)
