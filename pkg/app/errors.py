"""
Exception hierarchy shared by the services, the CLI and the HTTP surface.

Every error carries the process exit code the CLI reports for it.
"""


class SolverError(Exception):
    """Base class for all solver failures."""

    exit_code: int = 1


class ConfigError(SolverError):
    """Invalid configuration text or values."""

    exit_code = 2

    def __init__(self, message: str, errors: list[str] | None = None):
        self.errors = errors or [message]
        super().__init__(message)


class RegimeError(SolverError, ValueError):
    """A separation-regime precondition (a << d << b) is violated."""

    exit_code = 2


class StabilityError(SolverError, ValueError):
    """Explicit time step above the stability bound."""

    exit_code = 2


class GeometryError(SolverError, ValueError):
    """Evaluation point inside a particle or too close to a layer."""

    exit_code = 2


class QuadratureError(SolverError, ValueError):
    """Quadrature rule too coarse for the requested check."""

    exit_code = 2


class NumericalError(SolverError):
    """Numerical failure during a solve."""

    exit_code = 3


class NearSingularError(NumericalError):
    """Condition estimate of a dense system exceeds the configured limit."""

    def __init__(self, message: str, condition: float):
        self.condition = condition
        super().__init__(message)


class DivergenceError(NumericalError):
    """Fixed-point iteration residual kept growing or never converged."""


class SingularityError(NumericalError, ValueError):
    """Kernel evaluated at coincident points."""


class PackingInfeasibleError(NumericalError):
    """Hard-core sampler ran out of candidate draws."""


class OutputError(SolverError):
    """Output directory or file could not be written or read."""

    exit_code = 4
