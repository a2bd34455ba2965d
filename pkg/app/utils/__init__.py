"""
Utility functions and helpers.
"""

from .extrapolation import observed_order, polynomial_limit, richardson_extrapolate
from .linalg import condition_estimate, relative_residual, solve_dense

__all__ = [
    "condition_estimate",
    "observed_order",
    "polynomial_limit",
    "relative_residual",
    "richardson_extrapolate",
    "solve_dense",
]
