"""
Numerical containers: kernel parameters, quadrature tables, dense systems,
grid solutions and verification reports.
"""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .medium import CubePartition


class KernelParams(BaseModel):
    """Laplace parameter of the Yukawa kernel g(x, y, lambda)"""

    model_config = ConfigDict(frozen=True)

    lam: float = Field(default=0.0, ge=0.0, description="Laplace parameter (1/time)")

    @property
    def root(self) -> float:
        return float(np.sqrt(self.lam))


class QuadratureTable(BaseModel):
    """Cell-integrated kernel weights w[q, p] = int_{cell p} g(x_q, y) dy"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    partition: CubePartition
    params: KernelParams
    weights: np.ndarray

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.weights)


class DenseSystem(BaseModel):
    """
    Square system (I + A) x = b. Solver diagnostics are filled in by
    `app.utils.linalg.solve_dense`.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    matrix: np.ndarray
    rhs: np.ndarray
    residual: float | None = None
    condition: float | None = None
    method: str | None = None

    @property
    def dimension(self) -> int:
        return int(self.rhs.shape[0])


class ChargeVector(BaseModel):
    """Leading-order charges Q_m of the particle layers"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray


class AbsorptionField(BaseModel):
    """Cellwise q_p = h(x_p) c(x_p) N(x_p)"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    partition: CubePartition
    values: np.ndarray

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.values >= 0.0))


class SolutionMode(str, Enum):
    """What a grid solution holds"""

    LAPLACE = "laplace"  # U(x, lambda)
    SCALED = "scaled"  # W = lambda U
    STEADY = "steady"  # psi, the long-time average


class GridSolution(BaseModel):
    """Cellwise values of a homogenized solve"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    partition: CubePartition
    values: np.ndarray
    lam: float = Field(ge=0.0)
    mode: SolutionMode

    @property
    def scaled_values(self) -> np.ndarray:
        """W = lambda U whatever the stored mode."""
        if self.mode == SolutionMode.LAPLACE:
            return self.lam * self.values
        return self.values


class SphericalLayer(BaseModel):
    """Uniform single layer on a sphere with a product surface rule"""

    model_config = ConfigDict(frozen=True)

    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    radius: float = Field(gt=0.0)
    sigma: float = 1.0
    n_theta: int = Field(default=64, ge=1)
    n_phi: int = Field(default=128, ge=1)

    @property
    def area(self) -> float:
        return 4.0 * np.pi * self.radius**2

    @property
    def charge(self) -> float:
        return self.sigma * self.area


class LemmaReport(BaseModel):
    """Outcome of a far-field (J2 versus J1) check"""

    radius: float
    lam: float
    distance: float
    j1: float
    j2: float
    ratio: float
    analytic_ratio: float
    bound: float
    constant: float = Field(description="|ratio| / bound")


class StudyReport(BaseModel):
    """Tabular study result plus scalar summary"""

    name: str
    columns: list[str]
    rows: list[dict[str, float | int]] = Field(default_factory=list)
    summary: dict[str, float | int | str | bool] = Field(default_factory=dict)
