"""
Pydantic models for configuration, domain data and API bodies.
"""

from .medium import BoxDomain, CubePartition, FieldKind, ParticleCloud, ScalarField
from .numerics import (
    AbsorptionField,
    ChargeVector,
    DenseSystem,
    GridSolution,
    KernelParams,
    LemmaReport,
    QuadratureTable,
    SolutionMode,
    SphericalLayer,
    StudyReport,
)
from .requests import LemmaSettings, RunConfig, Study
from .responses import ErrorResponse, StudyResponse

__all__ = [
    "AbsorptionField",
    "BoxDomain",
    "ChargeVector",
    "CubePartition",
    "DenseSystem",
    "ErrorResponse",
    "FieldKind",
    "GridSolution",
    "KernelParams",
    "LemmaReport",
    "LemmaSettings",
    "ParticleCloud",
    "QuadratureTable",
    "RunConfig",
    "ScalarField",
    "SolutionMode",
    "SphericalLayer",
    "Study",
    "StudyReport",
    "StudyResponse",
]
