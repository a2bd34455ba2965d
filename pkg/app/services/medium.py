"""
Particle medium: distribution-law sampling of particle centers, the cube
partition and counting.
"""

import logging

import numpy as np
from scipy.special import roots_legendre

from ..config.settings import (
    INTEGRATION_ORDER,
    RETRY_FACTOR,
    SEPARATION_FRACTION,
    THINNING_BATCH,
)
from ..errors import PackingInfeasibleError, RegimeError
from ..models.medium import BoxDomain, CubePartition, FieldKind, ParticleCloud, ScalarField

logger = logging.getLogger(__name__)


def integrate(field: ScalarField, domain: BoxDomain, order: int = INTEGRATION_ORDER) -> float:
    """Tensor Gauss-Legendre integral of a field over a box."""
    if field.kind == FieldKind.CONSTANT:
        return field.value * domain.volume

    nodes, weights = roots_legendre(order)
    axes, axis_weights = [], []
    for lo, length in zip(domain.lower, domain.lengths):
        axes.append(lo + 0.5 * (nodes + 1.0) * length)
        axis_weights.append(0.5 * length * weights)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    w = np.einsum("i,j,k->ijk", *axis_weights)
    return float(np.sum(field.evaluate(grid) * w))


def expected_count(domain: BoxDomain, N: ScalarField, a: float, kappa: float) -> float:
    """Mean particle count a^-(2 - kappa) * int N dx over the domain."""
    return integrate(N, domain) / a ** (2.0 - kappa)


def default_separation(domain: BoxDomain, N: ScalarField, a: float, kappa: float) -> float:
    """
    Hard-core distance d(a): a fraction of the nominal spacing
    (|D| a^(2 - kappa) / int N)^(1/3). Without particles any d > 2a will do.
    """
    total = integrate(N, domain)
    if total <= 0.0:
        return 4.0 * a
    spacing = (domain.volume * a ** (2.0 - kappa) / total) ** (1.0 / 3.0)
    return SEPARATION_FRACTION * spacing


def _draw_from_density(
    rng: np.random.Generator, domain: BoxDomain, N: ScalarField, n_max: float, size: int
) -> np.ndarray:
    """Thinning: uniform proposals kept with probability N(x) / n_max."""
    kept = []
    total = 0
    while total < size:
        proposals = rng.uniform(domain.lower, domain.upper, size=(size, 3))
        marks = rng.uniform(0.0, n_max, size=size)
        accepted = proposals[marks < N.evaluate(proposals)]
        kept.append(accepted)
        total += accepted.shape[0]
    return np.concatenate(kept)[:size]


def sample_particles(
    domain: BoxDomain,
    N: ScalarField,
    h: ScalarField,
    c: ScalarField,
    a: float,
    kappa: float,
    seed: int,
    min_separation: float | None = None,
) -> ParticleCloud:
    """
    Sample particle centers following the distribution law.

    The total count is Poisson with mean a^-(2 - kappa) int_D N dx; the
    centers are then placed one by one from the density N, rejecting any
    candidate closer than d to an accepted center.

    Args:
        domain: The box D
        N: Particle density field, non-negative on D
        h: Boundary coefficient field
        c: Surface factor field, positive on D
        a: Particle radius scale
        kappa: Distribution exponent in (0, 1)
        seed: Seed of the random generator
        min_separation: Hard-core distance; defaults to `default_separation`

    Returns:
        The sampled particle cloud

    Raises:
        ValueError: If a precondition on a, kappa, N or c fails
        RegimeError: If d <= 2a
        PackingInfeasibleError: If the candidate budget is exhausted
    """
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    if not 0.0 < kappa < 1.0:
        raise ValueError("kappa must lie in (0,1)")
    n_low, n_max = N.bounds(domain)
    if n_low < 0:
        raise ValueError("N must be non-negative on the domain")

    d = min_separation if min_separation is not None else default_separation(domain, N, a, kappa)
    if d <= 2.0 * a:
        raise RegimeError(f"separation d={d:.6g} must exceed the particle diameter 2a={2 * a:.6g}")

    rng = np.random.default_rng(seed)
    mean = expected_count(domain, N, a, kappa)
    count = int(rng.poisson(mean)) if mean > 0 else 0

    centers = np.empty((count, 3))
    placed = 0
    draws = 0
    budget = RETRY_FACTOR * count
    d2 = d * d
    while placed < count:
        for candidate in _draw_from_density(rng, domain, N, n_max, THINNING_BATCH):
            if draws >= budget:
                logger.error(f"Packing failed after {draws} draws ({placed}/{count} placed)")
                raise PackingInfeasibleError(
                    f"packing infeasible: placed {placed} of {count} particles with d={d:.6g} "
                    f"after {draws} candidate draws"
                )
            draws += 1
            if placed and np.min(np.sum((centers[:placed] - candidate) ** 2, axis=1)) < d2:
                continue
            centers[placed] = candidate
            placed += 1
            if placed == count:
                break

    h_values = h.evaluate(centers, domain)
    c_values = c.evaluate(centers, domain)
    if count and np.any(c_values <= 0):
        raise ValueError("c must be positive at every particle center")

    logger.info(
        f"Sampled {count} particles (mean {mean:.2f}) with a={a:g}, kappa={kappa:g}, "
        f"d={d:.4g}, seed={seed}, draws={draws}"
    )
    return ParticleCloud(
        domain=domain,
        a=a,
        kappa=kappa,
        centers=centers,
        h_values=h_values,
        c_values=c_values,
        min_separation=d,
    )


def partition(domain: BoxDomain, b: float, cloud: ParticleCloud | None = None) -> CubePartition:
    """
    Partition the domain into cubes of nominal side b.

    The per-axis cell count is round(L / b), so cells tile the box exactly and
    the interior cell side differs from b by less than one-cell slack.

    Raises:
        RegimeError: If b does not exceed the cloud's separation d
    """
    if b <= 0:
        raise ValueError(f"cube side must be positive, got {b}")
    if cloud is not None and b <= cloud.min_separation:
        raise RegimeError(
            f"cube side b={b:.6g} must exceed the particle separation d={cloud.min_separation:.6g}"
        )
    shape = tuple(max(1, int(round(length / b))) for length in domain.lengths)
    result = CubePartition(domain=domain, side=b, shape=shape, cloud=cloud)
    if cloud is not None and result.count >= max(cloud.count, 1):
        logger.warning(f"Partition has {result.count} cells for {cloud.count} particles (P >= M)")
    return result


def grid_partition(domain: BoxDomain, n: int) -> CubePartition:
    """Collocation grid with n cells along the longest axis."""
    if n < 1:
        raise ValueError(f"grid side-count must be positive, got {n}")
    side = float(np.max(domain.lengths)) / n
    shape = tuple(max(1, int(round(length / side))) for length in domain.lengths)
    return CubePartition(domain=domain, side=side, shape=shape)


def count_in(cloud: ParticleCloud, sub: BoxDomain) -> int:
    """Exact number of centers in the closed sub-box."""
    if not cloud.domain.contains_box(sub):
        raise ValueError("sub-box must lie inside the cloud's domain")
    if cloud.count == 0:
        return 0
    return int(np.count_nonzero(sub.contains(cloud.centers)))
