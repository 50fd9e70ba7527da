"""Backend selection for the hot kernels.

The compiled ``_core`` extension is preferred. Setting the environment variable
``RECOV_PURE_PYTHON=1`` before import forces the numpy fallback.
"""

import os

from . import _core_py

BACKEND = "python"
_impl = _core_py

if os.environ.get("RECOV_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        _impl = _compiled
        BACKEND = "cython"

BASIC, AT_LOWER, AT_UPPER, FREE, FIXED = (
    _core_py.BASIC, _core_py.AT_LOWER, _core_py.AT_UPPER, _core_py.FREE, _core_py.FIXED)
OPTIMAL, UNBOUNDED, ITERATION_LIMIT, SINGULAR = (
    _core_py.OPTIMAL, _core_py.UNBOUNDED, _core_py.ITERATION_LIMIT, _core_py.SINGULAR)

simplex_iterate = _impl.simplex_iterate
refactor = _impl.refactor
cube_vertex_max = _impl.cube_vertex_max
riesz_product = _impl.riesz_product
greedy_cover = _impl.greedy_cover
pairwise_max_dist = _impl.pairwise_max_dist
sign_patterns = _core_py.sign_patterns


def get_backend(name):
    """Return the kernel module for ``name`` in {'python', 'cython'}."""
    if name == "python":
        return _core_py
    from . import _core
    return _core
