"""
Residual-checked solves of dense second-kind systems (I + A) x = b.
"""

import logging

import numpy as np
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve

from ..config.settings import (
    CONDITION_LIMIT,
    DENSE_SOLVE_LIMIT,
    DIVERGENCE_WINDOW,
    FIXED_POINT_DAMPING,
    FIXED_POINT_MAX_SWEEPS,
    RESIDUAL_TOLERANCE,
)
from ..errors import DivergenceError, NearSingularError, NumericalError
from ..models.numerics import DenseSystem

logger = logging.getLogger(__name__)


def relative_residual(matrix: np.ndarray, x: np.ndarray, rhs: np.ndarray) -> float:
    """||M x - b|| / ||b||, or the absolute residual when b = 0."""
    norm_b = float(np.linalg.norm(rhs))
    r = float(np.linalg.norm(matrix @ x - rhs))
    return r / norm_b if norm_b > 0.0 else r


def condition_estimate(matrix: np.ndarray, lu: np.ndarray) -> float:
    """1-norm condition estimate from an LU factorization (LAPACK gecon)."""
    gecon = get_lapack_funcs("gecon", (lu,))
    anorm = float(np.linalg.norm(matrix, 1))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0 or rcond == 0.0:
        return float("inf")
    return 1.0 / float(rcond)


def _solve_lu(system: DenseSystem) -> np.ndarray:
    matrix, rhs = system.matrix, system.rhs
    lu, piv = lu_factor(matrix, check_finite=True)
    condition = condition_estimate(matrix, lu)
    system.condition = condition
    if condition > CONDITION_LIMIT:
        logger.error(f"Near-singular system: condition estimate {condition:.3e}")
        raise NearSingularError(
            f"near-singular system: condition estimate {condition:.3e} exceeds {CONDITION_LIMIT:.0e}",
            condition=condition,
        )
    x = lu_solve((lu, piv), rhs)
    residual = relative_residual(matrix, x, rhs)
    if residual > RESIDUAL_TOLERANCE:
        # one step of iterative refinement
        x = x + lu_solve((lu, piv), rhs - matrix @ x)
        residual = relative_residual(matrix, x, rhs)
    system.residual = residual
    system.method = "lu"
    return x


def _solve_fixed_point(system: DenseSystem, omega: float) -> np.ndarray:
    """Damped iteration x <- (1 - w) x + w (b - A x) with A = M - I."""
    matrix, rhs = system.matrix, system.rhs
    x = rhs.copy()
    previous = relative_residual(matrix, x, rhs)
    growing = 0
    for sweep in range(1, FIXED_POINT_MAX_SWEEPS + 1):
        x = x + omega * (rhs - matrix @ x)
        residual = relative_residual(matrix, x, rhs)
        if residual <= RESIDUAL_TOLERANCE:
            logger.info(f"Fixed-point iteration converged in {sweep} sweeps")
            system.residual = residual
            system.method = "fixed-point"
            return x
        growing = growing + 1 if residual > previous else 0
        if growing >= DIVERGENCE_WINDOW or not np.isfinite(residual):
            logger.error(f"Fixed-point iteration diverging at sweep {sweep}: residual {residual:.3e}")
            raise DivergenceError(
                f"fixed-point iteration diverged: residual grew for {growing} consecutive sweeps "
                f"(now {residual:.3e})"
            )
        previous = residual
    raise DivergenceError(
        f"fixed-point iteration did not reach {RESIDUAL_TOLERANCE:.0e} in {FIXED_POINT_MAX_SWEEPS} sweeps"
    )


def solve_dense(
    system: DenseSystem, dense_limit: int = DENSE_SOLVE_LIMIT, damping: float = FIXED_POINT_DAMPING
) -> np.ndarray:
    """
    Solve a dense second-kind system and record residual and condition
    diagnostics on it.

    Dense LU with partial pivoting up to `dense_limit` unknowns, damped
    fixed-point iteration with relaxation `damping` in (0, 1] above.

    Raises:
        NearSingularError: If the condition estimate exceeds the limit
        DivergenceError: If the fixed-point iteration diverges
        NumericalError: If the system has non-finite entries or the residual
            check fails
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError(f"damping must lie in (0, 1], got {damping}")
    if system.dimension == 0:
        system.residual, system.condition, system.method = 0.0, 1.0, "empty"
        return np.zeros(0)
    if not (np.all(np.isfinite(system.matrix)) and np.all(np.isfinite(system.rhs))):
        raise NumericalError(f"system of size {system.dimension} has non-finite entries")
    if system.dimension <= dense_limit:
        x = _solve_lu(system)
    else:
        x = _solve_fixed_point(system, damping)
    if not np.all(np.isfinite(x)) or system.residual > RESIDUAL_TOLERANCE:
        raise NumericalError(
            f"solution failed the residual check: {system.residual:.3e} > {RESIDUAL_TOLERANCE:.0e}"
        )
    logger.debug(
        f"Solved n={system.dimension} by {system.method}: residual {system.residual:.2e}, "
        f"condition {system.condition}"
    )
    return x
