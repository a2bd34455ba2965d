"""
Geometry and material models: the box domain, scalar fields, the particle
cloud and the cube partition.
"""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class BoxDomain(BaseModel):
    """Axis-aligned box [lo, hi] in one global length unit"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    lo: tuple[float, float, float] = Field(
        default=(0.0, 0.0, 0.0), description="Lower corner", examples=[[0, 0, 0]]
    )
    hi: tuple[float, float, float] = Field(
        default=(1.0, 1.0, 1.0), description="Upper corner", examples=[[1, 1, 1]]
    )

    @model_validator(mode="after")
    def check_extent(self):
        if any(h <= lo for lo, h in zip(self.lo, self.hi)):
            raise ValueError(f"box hi {self.hi} must exceed lo {self.lo} on every axis")
        return self

    @property
    def lower(self) -> np.ndarray:
        return np.asarray(self.lo, dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.asarray(self.hi, dtype=float)

    @property
    def lengths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of points lying in the closed box."""
        pts = np.asarray(points, dtype=float)
        return np.all((pts >= self.lower) & (pts <= self.upper), axis=-1)

    def contains_box(self, other: "BoxDomain") -> bool:
        return bool(np.all(other.lower >= self.lower) and np.all(other.upper <= self.upper))

    def enlarged(self, fraction: float) -> "BoxDomain":
        """Box grown by `fraction` of its side length on every side."""
        pad = fraction * self.lengths
        return BoxDomain(
            lo=tuple(float(v) for v in self.lower - pad),
            hi=tuple(float(v) for v in self.upper + pad),
        )


class FieldKind(str, Enum):
    """Supported closed-form scalar fields"""

    CONSTANT = "constant"
    GAUSSIAN = "gaussian"
    POLYNOMIAL = "polynomial"


class ScalarField(BaseModel):
    """
    Position -> real mapping used for N(x), h(x), c(x) and f(x).

    A gaussian bump is offset + amplitude * exp(-|x - center|^2 / (2 width^2)).
    A polynomial is a list of terms (coefficient, px, py, pz).
    When a domain is given, evaluation outside it returns 0.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: FieldKind = FieldKind.CONSTANT
    value: float = Field(default=0.0, description="Constant value")
    center: tuple[float, float, float] = (0.5, 0.5, 0.5)
    width: float = Field(default=0.25, gt=0.0)
    amplitude: float = 0.0
    offset: float = 0.0
    terms: list[tuple[float, int, int, int]] = Field(default_factory=list)

    @field_validator("terms")
    @classmethod
    def validate_terms(cls, v):
        for coef, *powers in v:
            if any(p < 0 for p in powers):
                raise ValueError("polynomial powers must be non-negative")
            if not np.isfinite(coef):
                raise ValueError("polynomial coefficients must be finite")
        return v

    @classmethod
    def constant(cls, value: float) -> "ScalarField":
        return cls(kind=FieldKind.CONSTANT, value=value)

    @classmethod
    def gaussian(
        cls, center, width: float, amplitude: float, offset: float = 0.0
    ) -> "ScalarField":
        return cls(
            kind=FieldKind.GAUSSIAN,
            center=tuple(float(c) for c in center),
            width=width,
            amplitude=amplitude,
            offset=offset,
        )

    def scaled(self, factor: float) -> "ScalarField":
        """The field multiplied by a constant factor."""
        return self.model_copy(
            update={
                "value": self.value * factor,
                "amplitude": self.amplitude * factor,
                "offset": self.offset * factor,
                "terms": [(c * factor, px, py, pz) for c, px, py, pz in self.terms],
            }
        )

    def evaluate(self, points, domain: BoxDomain | None = None) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.kind == FieldKind.CONSTANT:
            values = np.full(pts.shape[:-1], self.value)
        elif self.kind == FieldKind.GAUSSIAN:
            r2 = np.sum((pts - np.asarray(self.center)) ** 2, axis=-1)
            values = self.offset + self.amplitude * np.exp(-r2 / (2.0 * self.width**2))
        else:
            values = np.zeros(pts.shape[:-1])
            for coef, px, py, pz in self.terms:
                values = values + coef * pts[..., 0] ** px * pts[..., 1] ** py * pts[..., 2] ** pz
        if domain is not None:
            values = np.where(domain.contains(pts), values, 0.0)
        return values

    def __call__(self, points, domain: BoxDomain | None = None) -> np.ndarray:
        return self.evaluate(points, domain)

    def bounds(self, domain: BoxDomain, samples: int = 33) -> tuple[float, float]:
        """
        Lower and upper bounds of the field over the domain. For polynomials the
        lower bound is the sampled minimum and the upper bound is the sampled
        maximum widened by 5% of the spread, a majorant for thinning.
        """
        if self.kind == FieldKind.CONSTANT:
            return self.value, self.value
        if self.kind == FieldKind.GAUSSIAN:
            return (
                self.offset + min(self.amplitude, 0.0),
                self.offset + max(self.amplitude, 0.0),
            )
        axes = [np.linspace(lo, hi, samples) for lo, hi in zip(domain.lo, domain.hi)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        values = self.evaluate(grid)
        low, high = float(values.min()), float(values.max())
        return low, high + 0.05 * (high - low)

    def is_zero(self) -> bool:
        if self.kind == FieldKind.CONSTANT:
            return self.value == 0.0
        if self.kind == FieldKind.GAUSSIAN:
            return self.amplitude == 0.0 and self.offset == 0.0
        return all(c == 0.0 for c, *_ in self.terms)


class ParticleCloud(BaseModel):
    """Sampled particle centers with per-particle h_m and c_m"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    domain: BoxDomain
    a: float = Field(gt=0.0, description="Particle radius scale")
    kappa: float = Field(gt=0.0, lt=1.0)
    centers: np.ndarray = Field(description="Particle centers, shape (M, 3)")
    h_values: np.ndarray
    c_values: np.ndarray
    min_separation: float = Field(gt=0.0, description="Hard-core distance d")

    @property
    def count(self) -> int:
        return int(self.centers.shape[0])

    @property
    def scale(self) -> float:
        """a^(2 - kappa), the per-particle weight in the many-body sums."""
        return self.a ** (2.0 - self.kappa)


class CubePartition(BaseModel):
    """
    Uniform partition of the domain into P cells, stored row-major
    (x slowest, z fastest).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    domain: BoxDomain
    side: float = Field(gt=0.0, description="Nominal cube side b")
    shape: tuple[int, int, int]
    cloud: ParticleCloud | None = None

    @property
    def spacing(self) -> np.ndarray:
        return self.domain.lengths / np.asarray(self.shape)

    @property
    def count(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volumes(self) -> np.ndarray:
        return np.full(self.count, self.cell_volume)

    @property
    def indices(self) -> np.ndarray:
        """Integer (i, j, k) index of every cell, shape (P, 3)."""
        grid = np.indices(self.shape).reshape(3, -1).T
        return grid

    @property
    def centers(self) -> np.ndarray:
        return self.domain.lower + (self.indices + 0.5) * self.spacing

    def locate(self, points) -> np.ndarray:
        """Flat cell index of every point, -1 outside the domain."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ijk = np.floor((pts - self.domain.lower) / self.spacing).astype(int)
        ijk = np.clip(ijk, 0, np.asarray(self.shape) - 1)
        flat = np.ravel_multi_index(ijk.T, self.shape)
        return np.where(self.domain.contains(pts), flat, -1)

    def particle_counts(self) -> np.ndarray:
        if self.cloud is None:
            raise ValueError("partition was built without a particle cloud")
        cells = self.locate(self.cloud.centers)
        return np.bincount(cells[cells >= 0], minlength=self.count)
