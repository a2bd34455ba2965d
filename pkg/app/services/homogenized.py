"""
Homogenized limit: collocation solve of the integral equation
U = F - int_D g q U dy, the absorption field q = h c N, and the long-time
average psi = (I + B)^-1 phi.

The primary unknown is W = lambda U, so the source carries no 1/lambda
factor and lambda -> 0 is a regular limit.
"""

import logging

import numpy as np

from ..models.medium import CubePartition, ScalarField
from ..models.numerics import (
    AbsorptionField,
    DenseSystem,
    GridSolution,
    KernelParams,
    QuadratureTable,
    SolutionMode,
)
from ..utils.linalg import solve_dense
from .kernel import cell_weights_at, scaled_source

logger = logging.getLogger(__name__)


def build_q(partition: CubePartition, h: ScalarField, c: ScalarField, N: ScalarField) -> AbsorptionField:
    """q_p = h(x_p) c(x_p) N(x_p) at the cell centers."""
    centers = partition.centers
    domain = partition.domain
    values = h.evaluate(centers, domain) * c.evaluate(centers, domain) * N.evaluate(centers, domain)
    return AbsorptionField(partition=partition, values=values)


def _check_table(partition: CubePartition, table: QuadratureTable, lam: float) -> None:
    if table.partition.shape != partition.shape or table.partition.domain != partition.domain:
        raise ValueError("quadrature table was built for a different partition")
    if table.params.lam != lam:
        raise ValueError(f"quadrature table lambda {table.params.lam:g} does not match {lam:g}")


def operator_norm_bound(table: QuadratureTable, q: AbsorptionField) -> float:
    """max_p sum_p' |w_pp' q_p'|, an infinity-norm bound of B."""
    return float(np.max(np.sum(np.abs(table.weights * q.values[None, :]), axis=1)))


def neumann_series(table: QuadratureTable, q: AbsorptionField, rhs: np.ndarray, terms: int) -> np.ndarray:
    """Truncated series sum_{k < terms} (-B)^k rhs."""
    B = table.weights * q.values[None, :]
    term = np.asarray(rhs, dtype=float)
    total = term.copy()
    for _ in range(terms - 1):
        term = -(B @ term)
        total += term
    return total


def _solve_second_kind(table: QuadratureTable, q: AbsorptionField, rhs: np.ndarray) -> np.ndarray:
    if not np.any(q.values):
        return rhs.copy()
    system = DenseSystem(matrix=np.eye(rhs.shape[0]) + table.weights * q.values[None, :], rhs=rhs)
    values = solve_dense(system)
    logger.info(
        f"Collocation solve P={system.dimension}: residual {system.residual:.2e}, "
        f"condition {system.condition:.3e}"
    )
    return values


def _warn_if_negative(values: np.ndarray, q: AbsorptionField, f_values: np.ndarray) -> None:
    if q.is_nonnegative() and np.all(f_values >= 0.0):
        scale = float(np.max(np.abs(values))) if values.size else 0.0
        if np.any(values < -1e-12 * max(scale, 1.0)):
            logger.warning(
                f"Negative solution value {values.min():.3e} although q >= 0 and f >= 0"
            )


def solve_homogenized(
    partition: CubePartition,
    q: AbsorptionField,
    f: ScalarField,
    params: KernelParams,
    table: QuadratureTable,
    scaled: bool = False,
) -> GridSolution:
    """
    Collocation solve of W_p = G_p - sum_p' w_pp' q_p' W_p' with G = lambda F.

    Args:
        partition: Collocation grid (cell centers are the nodes)
        q: Absorption field on the grid
        f: Source field
        params: Kernel parameters
        table: Quadrature table for this grid and lambda
        scaled: Return W (lambda >= 0) instead of U = W / lambda (lambda > 0)

    Returns:
        GridSolution in SCALED or LAPLACE mode

    Raises:
        NearSingularError: If I + B is near-singular
    """
    if not scaled and params.lam <= 0.0:
        raise ValueError("U-mode requires lambda > 0; request the scaled field instead")
    _check_table(partition, table, params.lam)
    f_values = f.evaluate(partition.centers, partition.domain)
    G = table.weights @ f_values
    W = _solve_second_kind(table, q, G)
    _warn_if_negative(W, q, f_values)
    if scaled:
        return GridSolution(partition=partition, values=W, lam=params.lam, mode=SolutionMode.SCALED)
    return GridSolution(partition=partition, values=W / params.lam, lam=params.lam, mode=SolutionMode.LAPLACE)


def newton_potential(partition: CubePartition, f: ScalarField, table: QuadratureTable) -> np.ndarray:
    """phi_p = sum_p' w0_pp' f_p' with the lambda = 0 kernel."""
    _check_table(partition, table, 0.0)
    return table.weights @ f.evaluate(partition.centers, partition.domain)


def steady_average(
    partition: CubePartition, q: AbsorptionField, f: ScalarField, table: QuadratureTable
) -> GridSolution:
    """
    Long-time average psi solving (I + B) psi = phi, where B has kernel
    q(y) / (4 pi |x - y|) and phi is the Newtonian potential of f.
    """
    phi = newton_potential(partition, f, table)
    psi = _solve_second_kind(table, q, phi)
    _warn_if_negative(psi, q, f.evaluate(partition.centers, partition.domain))
    return GridSolution(partition=partition, values=psi, lam=0.0, mode=SolutionMode.STEADY)


def interpolate(solution: GridSolution, q: AbsorptionField, f: ScalarField, points) -> np.ndarray:
    """
    Nystrom interpolation of a grid solution at arbitrary points:
    W(x) = G(x) - sum_p w(x, p) q_p W_p, returned in the solution's mode.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    params = KernelParams(lam=solution.lam)
    G = scaled_source(pts, f, solution.partition, params)
    weights = cell_weights_at(pts, solution.partition, params)
    W = G - weights @ (q.values * solution.scaled_values)
    if solution.mode == SolutionMode.LAPLACE:
        return W / solution.lam
    return W


def pde_residual(solution: GridSolution, q: AbsorptionField, f: ScalarField) -> float:
    """
    max over interior cells of |(-Lap_h + lambda) W + q W - f| for the scaled
    field W = lambda U, using the 7-point stencil.

    Raises:
        ValueError: If the grid has fewer than 4 cells along an axis
    """
    partition = solution.partition
    shape = partition.shape
    if min(shape) < 4:
        raise ValueError(f"grid too coarse for the residual: {shape}, need at least 4 cells per axis")
    W = solution.scaled_values.reshape(shape)
    qv = q.values.reshape(shape)
    fv = f.evaluate(partition.centers, partition.domain).reshape(shape)
    hx, hy, hz = partition.spacing
    inner = (slice(1, -1),) * 3
    lap = (
        (W[2:, 1:-1, 1:-1] - 2.0 * W[inner] + W[:-2, 1:-1, 1:-1]) / hx**2
        + (W[1:-1, 2:, 1:-1] - 2.0 * W[inner] + W[1:-1, :-2, 1:-1]) / hy**2
        + (W[1:-1, 1:-1, 2:] - 2.0 * W[inner] + W[1:-1, 1:-1, :-2]) / hz**2
    )
    residual = -lap + (solution.lam + qv[inner]) * W[inner] - fv[inner]
    return float(np.max(np.abs(residual)))
