"""
Study dispatch shared by the CLI and the API.
"""

import logging
import time

import numpy as np
from pydantic import BaseModel, Field

from ..errors import ConfigError
from ..models.medium import CubePartition, ParticleCloud
from ..models.numerics import KernelParams, SphericalLayer, StudyReport
from ..models.requests import RunConfig, Study
from .homogenized import build_q, operator_norm_bound, pde_residual, solve_homogenized, steady_average
from .kernel import build_quadrature_table, source_field
from .manybody import assemble_manybody, solve
from .medium import expected_count, grid_partition, sample_particles
from .verify import (
    default_horizon,
    lambda_correction,
    lambda_correction_exact,
    lemma1_sweep,
    lemma2_convergence,
    max_decay_factor,
    self_interaction_check,
    self_interaction_exact,
    stability_bound,
    tauberian_study,
    theorem1_convergence_study,
    time_domain_oracle,
)

logger = logging.getLogger(__name__)


class RunOutcome(BaseModel):
    """Tables and scalar diagnostics produced by one study"""

    study: Study
    reports: list[StudyReport] = Field(default_factory=list)
    diagnostics: dict[str, float | int | str | bool] = Field(default_factory=dict)

    def report(self, name: str) -> StudyReport:
        for report in self.reports:
            if report.name == name:
                return report
        raise KeyError(name)


def cloud_report(cloud: ParticleCloud) -> StudyReport:
    report = StudyReport(name="cloud", columns=["x", "y", "z", "h", "c"])
    for (x, y, z), h, c in zip(cloud.centers, cloud.h_values, cloud.c_values):
        report.rows.append({"x": float(x), "y": float(y), "z": float(z), "h": float(h), "c": float(c)})
    return report


def grid_report(name: str, partition: CubePartition, values: np.ndarray) -> StudyReport:
    report = StudyReport(name=name, columns=["x", "y", "z", "value"])
    for (x, y, z), value in zip(partition.centers, values):
        report.rows.append({"x": float(x), "y": float(y), "z": float(z), "value": float(value)})
    return report


def _sample(config: RunConfig) -> ParticleCloud:
    return sample_particles(
        config.domain, config.N, config.h, config.c, config.a, config.kappa, config.seed, config.min_separation
    )


def _run_sample(config: RunConfig, outcome: RunOutcome) -> None:
    cloud = _sample(config)
    outcome.reports.append(cloud_report(cloud))
    outcome.diagnostics.update(
        {
            "count": cloud.count,
            "expected_count": expected_count(config.domain, config.N, config.a, config.kappa),
            "min_separation": cloud.min_separation,
        }
    )


def _run_manybody(config: RunConfig, outcome: RunOutcome) -> None:
    cloud = _sample(config)
    params = KernelParams(lam=config.lambdas[0])
    grid = grid_partition(config.domain, config.grid)
    F = source_field(cloud.centers, config.f, grid, params)
    system = assemble_manybody(cloud, params, F)
    U = solve(system)
    outcome.reports.append(cloud_report(cloud))
    solution = StudyReport(name="solution", columns=["index", "x", "y", "z", "U"])
    for index, ((x, y, z), value) in enumerate(zip(cloud.centers, U)):
        solution.rows.append({"index": index, "x": float(x), "y": float(y), "z": float(z), "U": float(value)})
    outcome.reports.append(solution)
    outcome.diagnostics.update(
        {
            "count": cloud.count,
            "lambda": params.lam,
            "residual": system.residual if system.residual is not None else 0.0,
            "condition": system.condition if system.condition is not None else 1.0,
            "method": system.method or "none",
        }
    )


def _run_homogenized(config: RunConfig, outcome: RunOutcome) -> None:
    params = KernelParams(lam=config.lambdas[0])
    grid = grid_partition(config.domain, config.grid)
    q = build_q(grid, config.h, config.c, config.N)
    table = build_quadrature_table(grid, params)
    solution = solve_homogenized(grid, q, config.f, params, table)
    outcome.reports.append(grid_report("field", grid, solution.values))
    outcome.diagnostics.update(
        {
            "lambda": params.lam,
            "operator_norm_bound": operator_norm_bound(table, q),
            "pde_residual": pde_residual(solution, q, config.f) if min(grid.shape) >= 4 else float("nan"),
        }
    )


def _steady(config: RunConfig):
    grid = grid_partition(config.domain, config.grid)
    q = build_q(grid, config.h, config.c, config.N)
    psi = steady_average(grid, q, config.f, build_quadrature_table(grid, KernelParams(lam=0.0)))
    return grid, q, psi


def _run_steady(config: RunConfig, outcome: RunOutcome) -> None:
    grid, _, psi = _steady(config)
    outcome.reports.append(grid_report("psi", grid, psi.values))
    outcome.diagnostics["psi_max"] = float(np.max(psi.values))


def _run_compare(config: RunConfig, outcome: RunOutcome, threads: int) -> None:
    report = theorem1_convergence_study(config, threads=threads)
    outcome.reports.append(report)
    outcome.diagnostics.update(report.summary)


def _run_tauberian(config: RunConfig, outcome: RunOutcome) -> None:
    grid = grid_partition(config.domain, config.grid)
    q = build_q(grid, config.h, config.c, config.N)
    report = tauberian_study(grid, q, config.f, config.lambdas)
    outcome.reports.append(report)
    outcome.diagnostics.update(report.summary)


def _run_lemmas(config: RunConfig, outcome: RunOutcome) -> None:
    settings = config.lemma
    outcome.reports.append(
        lemma1_sweep(settings.radii, settings.lambdas, settings.distance, settings.n_theta, settings.n_phi)
    )
    lemma2 = lemma2_convergence(settings.radii[0], 1.0, settings.levels)
    outcome.reports.append(lemma2)

    corrections = StudyReport(name="lambda_correction", columns=["a", "lambda", "correction", "analytic"])
    interactions = StudyReport(name="self_interaction", columns=["a", "lambda", "value", "analytic"])
    zeta = 1.0
    for a in settings.radii:
        layer = SphericalLayer(radius=a, n_theta=settings.n_theta, n_phi=settings.n_phi)
        for lam in settings.lambdas:
            params = KernelParams(lam=lam)
            corrections.rows.append(
                {
                    "a": a,
                    "lambda": lam,
                    "correction": lambda_correction(layer, params),
                    "analytic": lambda_correction_exact(a, lam),
                }
            )
            interactions.rows.append(
                {
                    "a": a,
                    "lambda": lam,
                    "value": self_interaction_check(layer, zeta, params),
                    "analytic": self_interaction_exact(a, zeta, lam),
                }
            )
    outcome.reports.extend([corrections, interactions])

    decay = StudyReport(name="decay", columns=["r", "maximum", "analytic"])
    for r in (0.5, 1.0, 2.0):
        decay.rows.append({"r": r, "maximum": max_decay_factor(r), "analytic": float(np.exp(-1.0) / r)})
    outcome.reports.append(decay)

    outcome.diagnostics.update({f"lemma1_{k}": v for k, v in outcome.reports[0].summary.items()})
    outcome.diagnostics.update({f"lemma2_{k}": v for k, v in lemma2.summary.items()})


def _run_time_average(config: RunConfig, outcome: RunOutcome) -> None:
    grid, q, psi = _steady(config)
    horizon = config.horizon or default_horizon(grid, q)
    dt = config.time_step or 0.9 * stability_bound(grid.spacing)
    average = time_domain_oracle(grid, q, config.f, horizon, dt)
    report = StudyReport(name="time_average", columns=["x", "y", "z", "value", "psi"])
    for (x, y, z), value, reference in zip(grid.centers, average, psi.values):
        report.rows.append(
            {"x": float(x), "y": float(y), "z": float(z), "value": float(value), "psi": float(reference)}
        )
    outcome.reports.append(report)
    norm = float(np.linalg.norm(psi.values))
    difference = float(np.linalg.norm(average - psi.values))
    outcome.diagnostics.update(
        {
            "horizon": horizon,
            "time_step": dt,
            "relative_difference": difference / norm if norm > 0 else difference,
        }
    )


def execute(study: Study, config: RunConfig, threads: int = 1) -> RunOutcome:
    """
    Run one study on a validated configuration.

    Raises:
        ConfigError: If the configuration names a different study
        SolverError: Any numerical or regime failure, passed through unchanged
    """
    if config.study is not None and config.study != study:
        raise ConfigError(f"configuration is for study {config.study.value!r}, not {study.value!r}")
    started = time.time()
    outcome = RunOutcome(study=study)
    logger.info(f"Running {study.value} (seed={config.seed}, threads={threads})")
    if study == Study.SAMPLE:
        _run_sample(config, outcome)
    elif study == Study.SOLVE_MANYBODY:
        _run_manybody(config, outcome)
    elif study == Study.SOLVE_HOMOGENIZED:
        _run_homogenized(config, outcome)
    elif study == Study.STEADY_AVERAGE:
        _run_steady(config, outcome)
    elif study == Study.COMPARE:
        _run_compare(config, outcome, threads)
    elif study == Study.TAUBERIAN:
        _run_tauberian(config, outcome)
    elif study == Study.VERIFY_LEMMAS:
        _run_lemmas(config, outcome)
    elif study == Study.TIME_AVERAGE:
        _run_time_average(config, outcome)
    else:
        raise ValueError(f"unknown study {study!r}")
    logger.info(f"{study.value} finished in {time.time() - started:.2f}s")
    return outcome
