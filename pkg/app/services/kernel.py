"""
Yukawa kernel g(x, y, lambda) = exp(-sqrt(lambda)|x - y|) / (4 pi |x - y|),
source potentials and cell quadrature, including the weakly singular
self-cell weight.
"""

import logging
import math

import numpy as np
from scipy.spatial.distance import cdist

from ..config.settings import MIDPOINT_ORDER, POINT_CHUNK
from ..errors import SingularityError
from ..models.medium import CubePartition, ScalarField
from ..models.numerics import KernelParams, QuadratureTable

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * math.pi

# int over the unit cube of dy / |y - center|, = 3 ln(2 + sqrt 3) - pi / 2
UNIT_CUBE_NEWTON = 2.3800773639795532


def green(x, y, params: KernelParams) -> float:
    """Kernel value for two distinct points."""
    r = float(np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)))
    if r == 0.0:
        raise SingularityError("kernel evaluated at coincident points; use the singular cell weight")
    return math.exp(-params.root * r) / (FOUR_PI * r)


def green_of_distance(r: np.ndarray, params: KernelParams) -> np.ndarray:
    """Vectorized kernel of strictly positive distances."""
    return np.exp(-params.root * r) / (FOUR_PI * r)


def green_matrix(sources: np.ndarray, targets: np.ndarray, params: KernelParams) -> np.ndarray:
    """g(targets[i], sources[j]) for point sets without coincidences."""
    r = cdist(np.atleast_2d(targets), np.atleast_2d(sources))
    if np.any(r == 0.0):
        raise SingularityError("coincident points in kernel matrix")
    return green_of_distance(r, params)


def _newton_corner(x: float, y: float, z: float) -> float:
    """Antiderivative of 1/r over [0,x]x[0,y]x[0,z] (x, y, z > 0)."""
    r = math.sqrt(x * x + y * y + z * z)
    value = (
        y * z * math.log(x + r)
        + x * z * math.log(y + r)
        + x * y * math.log(z + r)
        - 0.5 * x * x * math.atan(y * z / (x * r))
        - 0.5 * y * y * math.atan(x * z / (y * r))
        - 0.5 * z * z * math.atan(x * y / (z * r))
    )
    # faces through the origin
    value -= y * z * math.log(math.hypot(y, z))
    value -= x * z * math.log(math.hypot(x, z))
    value -= x * y * math.log(math.hypot(x, y))
    return value


def newton_box_integral(sides) -> float:
    """Closed-form int over a box of dy / |y - box center|."""
    sx, sy, sz = (float(s) for s in np.broadcast_to(np.asarray(sides, dtype=float), 3))
    if min(sx, sy, sz) <= 0:
        raise ValueError("box sides must be positive")
    return 8.0 * _newton_corner(0.5 * sx, 0.5 * sy, 0.5 * sz)


def midpoint_nodes(spacing, order: int = MIDPOINT_ORDER) -> tuple[np.ndarray, float]:
    """Midpoint nodes relative to a cell center, and the common weight."""
    h = np.broadcast_to(np.asarray(spacing, dtype=float), 3)
    ticks = (np.arange(order) + 0.5) / order - 0.5
    grid = np.stack(np.meshgrid(ticks, ticks, ticks, indexing="ij"), axis=-1).reshape(-1, 3)
    return grid * h, float(np.prod(h)) / order**3


def _bounded_remainder(r: np.ndarray, params: KernelParams) -> np.ndarray:
    """(exp(-sqrt(lambda) r) - 1) / (4 pi r), with its r = 0 limit."""
    k = params.root
    safe = np.where(r > 0.0, r, 1.0)
    return np.where(r > 0.0, np.expm1(-k * safe) / (FOUR_PI * safe), -k / FOUR_PI)


def singular_cell_weight(cell_side, params: KernelParams) -> float:
    """
    int over a cell of g(x_c, y) dy for x_c the cell center.

    Splits g = 1/(4 pi r) + (exp(-sqrt(lambda) r) - 1)/(4 pi r): the first part
    is integrated in closed form (b^2 * UNIT_CUBE_NEWTON / (4 pi) for a cube),
    the bounded remainder by the midpoint rule.
    """
    sides = np.broadcast_to(np.asarray(cell_side, dtype=float), 3)
    if np.any(sides <= 0):
        raise ValueError(f"cell side must be positive, got {cell_side}")
    weight = newton_box_integral(sides) / FOUR_PI
    if params.lam == 0.0:
        return weight
    nodes, w = midpoint_nodes(sides)
    return weight + w * float(np.sum(_bounded_remainder(np.linalg.norm(nodes, axis=1), params)))


def build_quadrature_table(partition: CubePartition, params: KernelParams) -> QuadratureTable:
    """
    Weights w[q, p] = int_{cell p} g(x_q, y) dy for all collocation points.

    On a uniform grid the weight only depends on the index offset q - p, so it
    is tabulated once per offset and gathered into the P x P matrix.
    """
    shape = np.asarray(partition.shape)
    spacing = partition.spacing
    nodes, w = midpoint_nodes(spacing)

    ranges = [np.arange(-(n - 1), n) for n in shape]
    offsets = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1) * spacing
    table = np.zeros(offsets.shape[:-1])
    for node in nodes:
        r = np.linalg.norm(offsets - node, axis=-1)
        table += w * green_of_distance(r, params)
    center = tuple(shape - 1)
    table[center] = singular_cell_weight(spacing, params)

    idx = partition.indices
    delta = idx[:, None, :] - idx[None, :, :] + (shape - 1)
    weights = table[delta[..., 0], delta[..., 1], delta[..., 2]]
    logger.debug(f"Quadrature table {weights.shape} built for lambda={params.lam:g}")
    return QuadratureTable(partition=partition, params=params, weights=weights)


def _cell_sums(points: np.ndarray, partition: CubePartition, params: KernelParams, f: ScalarField | None):
    """
    Per-cell midpoint sums of g(x, y) (times f(y) when given) for a block of
    points, with the containing cell replaced by its singular weight.
    """
    nodes, w = midpoint_nodes(partition.spacing)
    centers = partition.centers
    sums = np.zeros((points.shape[0], partition.count))
    for node in nodes:
        y = centers + node
        r = cdist(points, y)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(r > 0.0, green_of_distance(r, params), 0.0)
        if f is not None:
            g = g * f.evaluate(y, partition.domain)
        sums += w * g

    cells = partition.locate(points)
    inside = cells >= 0
    self_weight = singular_cell_weight(partition.spacing, params)
    if f is None:
        sums[inside, cells[inside]] = self_weight
    else:
        f_center = f.evaluate(centers, partition.domain)
        sums[inside, cells[inside]] = self_weight * f_center[cells[inside]]
    return sums


def cell_weights_at(points, partition: CubePartition, params: KernelParams) -> np.ndarray:
    """Nystrom interpolation weights int_{cell p} g(x, y) dy at arbitrary points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    blocks = [
        _cell_sums(pts[start : start + POINT_CHUNK], partition, params, None)
        for start in range(0, pts.shape[0], POINT_CHUNK)
    ]
    return np.vstack(blocks) if blocks else np.zeros((0, partition.count))


def scaled_source(x, f: ScalarField, grid: CubePartition, params: KernelParams):
    """
    G(x) = int_D g(x, y, lambda) f(y) dy, i.e. lambda * F(x, lambda).

    Accepts one point (returns a float) or an (n, 3) array (returns a vector).
    """
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if f.is_zero():
        values = np.zeros(pts.shape[0])
    else:
        values = np.concatenate(
            [
                _cell_sums(pts[start : start + POINT_CHUNK], grid, params, f).sum(axis=1)
                for start in range(0, pts.shape[0], POINT_CHUNK)
            ]
            or [np.zeros(0)]
        )
    return float(values[0]) if single else values


def source_field(x, f: ScalarField, grid: CubePartition, params: KernelParams):
    """F(x, lambda) = G(x) / lambda, defined for lambda > 0 only."""
    if params.lam <= 0.0:
        raise ValueError("F(x, lambda) requires lambda > 0; use scaled_source for lambda = 0")
    return scaled_source(x, f, grid, params) / params.lam
