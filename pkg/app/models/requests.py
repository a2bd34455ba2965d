"""
Run configuration models and enums, shared by the CLI and the API.
"""

import logging
import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..config.settings import SEPARATION_RATIO_FLOOR
from .medium import BoxDomain, FieldKind, ScalarField

logger = logging.getLogger(__name__)


class Study(str, Enum):
    """Supported studies, one per invocation"""

    SAMPLE = "sample"
    SOLVE_MANYBODY = "solve-manybody"
    SOLVE_HOMOGENIZED = "solve-homogenized"
    STEADY_AVERAGE = "steady-average"
    COMPARE = "compare"
    TAUBERIAN = "tauberian"
    VERIFY_LEMMAS = "verify-lemmas"
    TIME_AVERAGE = "time-average"


class LemmaSettings(BaseModel):
    """Parameters of the spherical-layer checks"""

    model_config = ConfigDict(extra="forbid")

    radii: list[float] = Field(default_factory=lambda: [0.1, 0.05])
    lambdas: list[float] = Field(default_factory=lambda: [0.0, 1.0, 4.0])
    distance: float = Field(default=1.0, gt=0.0)
    n_theta: int = Field(default=64, ge=8)
    n_phi: int = Field(default=128, ge=8)
    levels: list[int] = Field(
        default_factory=lambda: [16, 32, 64],
        description="Polar node counts of the double-integral refinement",
    )

    @field_validator("radii")
    @classmethod
    def validate_radii(cls, v):
        if not v or any(r <= 0 for r in v):
            raise ValueError("lemma radii must be positive")
        return v

    @field_validator("lambdas")
    @classmethod
    def validate_lambdas(cls, v):
        if any(lam < 0 for lam in v):
            raise ValueError("lemma lambdas must be non-negative")
        return v

    @field_validator("levels")
    @classmethod
    def validate_levels(cls, v):
        if len(v) < 2 or any(n < 8 for n in v) or sorted(v) != v:
            raise ValueError("levels must be at least two increasing node counts >= 8")
        return v


class RunConfig(BaseModel):
    """Validated experiment configuration"""

    model_config = ConfigDict(extra="forbid")

    study: Study | None = Field(default=None, description="Study this configuration is for; must match the requested study")
    domain: BoxDomain = Field(default_factory=BoxDomain)
    N: ScalarField = Field(default_factory=lambda: ScalarField.constant(0.5))
    h: ScalarField = Field(default_factory=lambda: ScalarField.constant(0.0))
    c: ScalarField = Field(default_factory=lambda: ScalarField.constant(4.0 * math.pi))
    f: ScalarField = Field(default_factory=lambda: ScalarField.constant(1.0))
    a: float = Field(default=0.04, gt=0.0)
    kappa: float = 0.5
    seed: int = Field(default=0, ge=0)
    seeds: int = Field(default=10, ge=1, description="Seeds per a-level in studies")
    lambdas: list[float] = Field(default_factory=lambda: [1.0])
    grid: int = Field(default=8, ge=1, description="Collocation cells per axis")
    cube_side: float = Field(default=0.25, gt=0.0, description="Coarse cube side b")
    min_separation: float | None = Field(default=None, gt=0.0)
    a_schedule: list[float] = Field(default_factory=lambda: [0.04, 0.02, 0.01])
    horizon: float | None = Field(default=None, gt=0.0, description="Time horizon T")
    time_step: float | None = Field(default=None, gt=0.0)
    lemma: LemmaSettings = Field(default_factory=LemmaSettings)
    output_dir: str = "out"

    @field_validator("kappa")
    @classmethod
    def validate_kappa(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError("kappa must lie in (0,1)")
        return v

    @field_validator("lambdas")
    @classmethod
    def validate_lambdas(cls, v):
        if not v:
            raise ValueError("at least one lambda is required")
        if any(lam <= 0 for lam in v):
            raise ValueError("lambda must be positive")
        return v

    @field_validator("a_schedule")
    @classmethod
    def validate_schedule(cls, v):
        if not v or any(a <= 0 for a in v):
            raise ValueError("a_schedule entries must be positive")
        if any(later >= earlier for earlier, later in zip(v, v[1:])):
            raise ValueError("a_schedule must be strictly decreasing")
        return v

    @model_validator(mode="after")
    def check_regime(self):
        from ..services.medium import default_separation

        n_low, _ = self.N.bounds(self.domain)
        if n_low < 0:
            raise ValueError("N must be non-negative on the domain")
        c_low, _ = self.c.bounds(self.domain)
        if c_low <= 0:
            raise ValueError("c must be positive on the domain")
        errors = []
        for a in sorted({self.a, *self.a_schedule}, reverse=True):
            d = self.min_separation or default_separation(self.domain, self.N, a, self.kappa)
            if d <= 2.0 * a:
                errors.append(f"separation d={d:.6g} must exceed 2a={2 * a:.6g}")
            elif d < SEPARATION_RATIO_FLOOR * a:
                logger.warning(f"Separation d={d:.4g} is only {d / a:.2f} particle radii at a={a:g}")
            if self.cube_side <= d:
                errors.append(f"cube side b={self.cube_side:.6g} must exceed d={d:.6g} at a={a:.6g}")
        if errors:
            raise ValueError("; ".join(errors))
        return self

    @property
    def seed_list(self) -> list[int]:
        return [self.seed + k for k in range(self.seeds)]

    def with_seed(self, seed: int) -> "RunConfig":
        return self.model_copy(update={"seed": seed})


__all__ = ["FieldKind", "LemmaSettings", "RunConfig", "Study"]
