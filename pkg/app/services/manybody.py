"""
Discrete many-body system for the effective field at the particle centers,
leading-order charges, the field anywhere in the medium and the coarse
cube-partition system.
"""

import logging
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import GeometryError, SingularityError
from ..models.medium import CubePartition, ParticleCloud, ScalarField
from ..models.numerics import ChargeVector, DenseSystem, KernelParams
from ..utils.linalg import solve_dense
from .kernel import green_of_distance

logger = logging.getLogger(__name__)


class CoarseMode(str, Enum):
    """Particle weight per coarse cell"""

    ANALYTIC = "analytic-density"  # N(x_p) |cell|
    EMPIRICAL = "empirical-count"  # a^(2 - kappa) * particles in the cell


def _require_positive_lambda(params: KernelParams) -> None:
    if params.lam <= 0.0:
        raise ValueError(f"many-body systems require lambda > 0, got {params.lam}")


def _coupling(points: np.ndarray, weights: np.ndarray, params: KernelParams) -> np.ndarray:
    """A[m, m'] = g(x_m, x_m') * weights[m'] with a zero diagonal."""
    n = points.shape[0]
    if n < 2:
        return np.zeros((n, n))
    r = cdist(points, points)
    off = ~np.eye(n, dtype=bool)
    if np.any(r[off] == 0.0):
        raise SingularityError("coincident centers in the many-body system")
    np.fill_diagonal(r, 1.0)
    matrix = green_of_distance(r, params) * weights[None, :]
    np.fill_diagonal(matrix, 0.0)
    return matrix


def assemble_manybody(
    cloud: ParticleCloud, params: KernelParams, F_values: np.ndarray
) -> DenseSystem:
    """
    System U_m + a^(2 - kappa) sum_{m' != m} g_mm' h_m' c_m' U_m' = F_m.

    Args:
        cloud: Particle cloud
        params: Kernel parameters, lambda > 0
        F_values: F(x_m, lambda) at every center

    Returns:
        DenseSystem holding I + A and F
    """
    _require_positive_lambda(params)
    F = np.asarray(F_values, dtype=float)
    if F.shape != (cloud.count,):
        raise ValueError(f"expected {cloud.count} source values, got shape {F.shape}")
    weights = cloud.scale * cloud.h_values * cloud.c_values
    A = _coupling(cloud.centers, weights, params)
    logger.info(f"Assembled many-body system with M={cloud.count}, lambda={params.lam:g}")
    return DenseSystem(matrix=np.eye(cloud.count) + A, rhs=F)


def solve(system: DenseSystem) -> np.ndarray:
    """Solve an assembled system; diagnostics are recorded on it."""
    return solve_dense(system)


def charges(cloud: ParticleCloud, U: np.ndarray) -> ChargeVector:
    """Q_m = -a^(2 - kappa) h_m c_m U_m, i.e. -zeta_m |S_m| U_m."""
    values = -cloud.scale * cloud.h_values * cloud.c_values * np.asarray(U, dtype=float)
    return ChargeVector(values=values)


def field_at(
    cloud: ParticleCloud,
    U: np.ndarray,
    x,
    params: KernelParams,
    F_of_x: float,
    exclude: int | None = None,
) -> float:
    """
    Field F(x) - a^(2 - kappa) sum_m g(x, x_m) h_m c_m U_m.

    With `exclude=m` the m-th particle's own term is dropped, giving the
    effective field acting on it; at x = x_m this reproduces U_m.

    Raises:
        GeometryError: If x lies within a of a (non-excluded) center
    """
    point = np.asarray(x, dtype=float)
    if cloud.count == 0:
        return float(F_of_x)
    keep = np.ones(cloud.count, dtype=bool)
    if exclude is not None:
        keep[exclude] = False
    centers = cloud.centers[keep]
    r = np.linalg.norm(centers - point, axis=1)
    if np.any(r < cloud.a):
        raise GeometryError(f"evaluation point {point.tolist()} lies inside a particle (within a={cloud.a:g})")
    q = cloud.h_values[keep] * cloud.c_values[keep] * np.asarray(U, dtype=float)[keep]
    return float(F_of_x - cloud.scale * np.sum(green_of_distance(r, params) * q))


def effective_fields(cloud: ParticleCloud, U: np.ndarray, params: KernelParams, F_values: np.ndarray) -> np.ndarray:
    """Effective field re-evaluated at every center (self term excluded)."""
    weights = cloud.scale * cloud.h_values * cloud.c_values
    A = _coupling(cloud.centers, weights, params)
    return np.asarray(F_values, dtype=float) - A @ np.asarray(U, dtype=float)


def assemble_coarse(
    partition: CubePartition,
    N: ScalarField,
    h: ScalarField,
    c: ScalarField,
    params: KernelParams,
    F_values: np.ndarray,
    mode: CoarseMode = CoarseMode.ANALYTIC,
) -> DenseSystem:
    """
    Coarse system U_p + sum_{p' != p} g_pp' h_p' c_p' w_p' U_p' = F_p over the
    cube centers, with w_p' = N(x_p') |cell| or, in empirical-count mode,
    a^(2 - kappa) times the number of particles in cell p'.
    """
    _require_positive_lambda(params)
    F = np.asarray(F_values, dtype=float)
    if F.shape != (partition.count,):
        raise ValueError(f"expected {partition.count} source values, got shape {F.shape}")
    centers = partition.centers
    domain = partition.domain
    if CoarseMode(mode) == CoarseMode.EMPIRICAL:
        if partition.cloud is None:
            raise ValueError("empirical-count mode needs a partition built with a particle cloud")
        density = partition.cloud.scale * partition.particle_counts()
    else:
        density = N.evaluate(centers, domain) * partition.volumes
    weights = h.evaluate(centers, domain) * c.evaluate(centers, domain) * density
    A = _coupling(centers, weights, params)
    logger.info(f"Assembled coarse system with P={partition.count} ({CoarseMode(mode).value})")
    return DenseSystem(matrix=np.eye(partition.count) + A, rhs=F)


__all__ = [
    "CoarseMode",
    "assemble_coarse",
    "assemble_manybody",
    "charges",
    "effective_fields",
    "field_at",
    "solve",
]
