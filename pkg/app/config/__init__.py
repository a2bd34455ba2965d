"""
Configuration settings and constants.
"""

from .settings import (
    BOUNDARY_UPDATE_INTERVAL,
    CONDITION_LIMIT,
    DEFAULT_THREADS,
    DENSE_SOLVE_LIMIT,
    DIVERGENCE_WINDOW,
    FIXED_POINT_DAMPING,
    FIXED_POINT_MAX_SWEEPS,
    INTEGRATION_ORDER,
    LOG_LEVEL,
    MIDPOINT_ORDER,
    MIN_THETA_NODES,
    POINT_CHUNK,
    RESIDUAL_TOLERANCE,
    RETRY_FACTOR,
    SEPARATION_FRACTION,
    SEPARATION_RATIO_FLOOR,
    TAIL_TOLERANCE,
    THINNING_BATCH,
)

__all__ = [
    "BOUNDARY_UPDATE_INTERVAL",
    "CONDITION_LIMIT",
    "DEFAULT_THREADS",
    "DENSE_SOLVE_LIMIT",
    "DIVERGENCE_WINDOW",
    "FIXED_POINT_DAMPING",
    "FIXED_POINT_MAX_SWEEPS",
    "INTEGRATION_ORDER",
    "LOG_LEVEL",
    "MIDPOINT_ORDER",
    "MIN_THETA_NODES",
    "POINT_CHUNK",
    "RESIDUAL_TOLERANCE",
    "RETRY_FACTOR",
    "SEPARATION_FRACTION",
    "SEPARATION_RATIO_FLOOR",
    "TAIL_TOLERANCE",
    "THINNING_BATCH",
]
