import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from recov import _core_py, kernels
from recov.measure import make_measurements
from recov.spaces import Space, Subspace

settings.register_profile("recov", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("recov")

KERNEL_NAMES = ("simplex_iterate", "refactor", "cube_vertex_max", "riesz_product",
                "greedy_cover", "pairwise_max_dist")


def _available_backends():
    names = ["python"]
    try:
        kernels.get_backend("cython")
        names.append("cython")
    except ImportError:
        pass
    return names


@pytest.fixture(params=_available_backends())
def backend(request, monkeypatch):
    """Route every hot kernel through one backend for the duration of a test."""
    mod = kernels.get_backend(request.param)
    for name in KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_instance(rng, N, n, m, norm="SUP"):
    """Random (space, V, M) with the standing assumption holding generically."""
    sp = Space.sequence(N, norm)
    V = Subspace(sp, rng.standard_normal((N, n)))
    M = make_measurements("GENERAL", {"rows": rng.standard_normal((m, N))}, sp)
    return sp, V, M
