"""Optimal recovery of model classes from linear measurements."""

from .angles import angle_report, mu_N_V, mu_V_N, radius_bounds
from .approx import ApproxMap, ApproxMethod, approximate
from .chebgeo import PolytopeSet, build_Kw, chebyshev_center_radius, diameter, restricted_radius
from .errors import (PreconditionError, RecovError, SolverError, StandingAssumptionError,
                     StructuralError)
from .kernels import BACKEND
from .lift import LiftKind, lifting_norm, make_lifting
from .measure import apply, m_norm, make_measurements
from .recover import RecoveryProblem, certify, recover, recover_into_V
from .spaces import Space, Subspace, dist_to_subspace, make_subspace_presets, norm

__version__ = "0.1.0"
__all__ = [
    "BACKEND", "__version__",
    "Space", "Subspace", "make_subspace_presets", "norm", "dist_to_subspace",
    "make_measurements", "apply", "m_norm",
    "ApproxMap", "ApproxMethod", "approximate",
    "LiftKind", "make_lifting", "lifting_norm",
    "mu_V_N", "mu_N_V", "angle_report", "radius_bounds",
    "RecoveryProblem", "recover", "recover_into_V", "certify",
    "PolytopeSet", "build_Kw", "diameter", "chebyshev_center_radius", "restricted_radius",
    "RecovError", "StructuralError", "PreconditionError", "StandingAssumptionError", "SolverError",
]
