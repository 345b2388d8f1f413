"""Numerical certification of Gaussian criticality for paraboloid extension
and Strichartz functionals.

The package evaluates the one-variable integrals to which the Euler-Lagrange
equations reduce for radial Gaussians, by two independent routes (contour
deformation and direct real-line quadrature), and decides criticality from
the constancy of the resulting profiles.
"""

from gausscrit.exponents import (
    AdmissiblePair,
    Case,
    DomainError,
    ExponentConfig,
    check_admissible,
    dual_exponent,
    make_config,
)
from gausscrit.quadrature import ConvergenceError, IntegralResult, QuadSpec

__all__ = [
    "AdmissiblePair",
    "Case",
    "ConvergenceError",
    "DomainError",
    "ExponentConfig",
    "IntegralResult",
    "QuadSpec",
    "check_admissible",
    "dual_exponent",
    "make_config",
]

__version__ = "0.1.0"
