"""
Tests for the spherical-layer checks, the Tauberian study, the time-domain
oracle and the many-body convergence study.
"""

import math
from pathlib import Path

import numpy as np
import pytest

from app.cli import parse_config
from app.errors import GeometryError, QuadratureError, StabilityError
from app.models import KernelParams, RunConfig, ScalarField, SphericalLayer
from app.services.homogenized import build_q, steady_average
from app.services.kernel import build_quadrature_table
from app.services.medium import grid_partition
from app.services.verify import (
    default_horizon,
    double_layer_integral,
    lambda_correction,
    lambda_correction_exact,
    layer_ratio_exact,
    lemma1_check,
    lemma1_sweep,
    lemma2_check,
    lemma2_convergence,
    max_decay_factor,
    self_interaction_check,
    self_interaction_exact,
    sphere_nodes,
    stability_bound,
    tauberian_study,
    theorem1_convergence_study,
    time_domain_oracle,
)

ZERO = ScalarField.constant(0.0)
CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_sphere_nodes_cover_the_surface():
    layer = SphericalLayer(center=(0.2, 0.1, 0.0), radius=0.3, n_theta=16, n_phi=32)
    points, normals, weights = sphere_nodes(layer, offset=True)
    assert weights.sum() == pytest.approx(4 * math.pi * 0.09, rel=1e-12)
    np.testing.assert_allclose(np.linalg.norm(points - layer.center, axis=1), 0.3)
    np.testing.assert_allclose(np.linalg.norm(normals, axis=1), 1.0)


def test_lemma1_laplace_ratio_vanishes():
    report = lemma1_check(SphericalLayer(radius=0.1), (1.0, 0.0, 0.0), KernelParams(lam=0.0))
    assert abs(report.ratio) < 1e-10
    assert report.bound == pytest.approx(0.1)


def test_lemma1_matches_closed_form():
    report = lemma1_check(SphericalLayer(radius=0.1, sigma=2.0), (1.0, 0.0, 0.0), KernelParams(lam=4.0))
    assert report.analytic_ratio == pytest.approx(math.sinh(0.2) / 0.2 - 1.0)
    assert report.ratio == pytest.approx(report.analytic_ratio, rel=1e-6)
    assert report.constant <= 1.0


def test_lemma1_ratio_shrinks_with_radius():
    params = KernelParams(lam=1.0)
    big = lemma1_check(SphericalLayer(radius=0.1), (1.0, 0.0, 0.0), params)
    small = lemma1_check(SphericalLayer(radius=0.05), (1.0, 0.0, 0.0), params)
    assert abs(small.ratio) <= 0.5 * abs(big.ratio)


def test_lemma1_rejects_close_points():
    with pytest.raises(GeometryError):
        lemma1_check(SphericalLayer(radius=0.1), (0.25, 0.0, 0.0), KernelParams(lam=1.0))


def test_lemma1_sweep_rows():
    report = lemma1_sweep([0.1, 0.05], [0.0, 1.0], 1.0, n_theta=16, n_phi=32)
    assert report.columns == ["a", "lambda", "ratio", "analytic", "bound"]
    assert len(report.rows) == 4
    assert report.summary["max_relative_mismatch"] < 1e-6


def test_small_ratio_series():
    assert layer_ratio_exact(1e-3, 1.0) == pytest.approx(1e-6 / 6, rel=1e-6)


def test_lemma2_needs_enough_nodes():
    with pytest.raises(QuadratureError):
        lemma2_check(SphericalLayer(radius=0.1, n_theta=4, n_phi=8))


def test_lemma2_zero_density():
    assert lemma2_check(SphericalLayer(radius=0.1, sigma=0.0)) == 0.0


def test_lemma2_jump_term_tends_to_minus_charge():
    layer = SphericalLayer(radius=0.1, sigma=1.0, n_theta=64, n_phi=128)
    assert lemma2_check(layer) == pytest.approx(-layer.charge, rel=1e-2)
    assert double_layer_integral(layer) == pytest.approx(-0.5 * layer.charge, rel=1e-1)


def test_lemma2_convergence_report():
    report = lemma2_convergence(0.1, 1.0, [16, 32, 64])
    errors = [abs(row["error"]) for row in report.rows]
    assert errors[-1] < errors[0]
    assert report.summary["finest_relative_error"] < 1e-2
    assert report.summary["observed_order"] == pytest.approx(1.0, abs=0.2)
    with pytest.raises(ValueError):
        lemma2_convergence(0.1, 1.0, [16, 24, 64])


def test_lambda_correction_is_linear_in_radius():
    params = KernelParams(lam=1.0)
    big = lambda_correction(SphericalLayer(radius=0.1, n_theta=32, n_phi=64), params)
    small = lambda_correction(SphericalLayer(radius=0.05, n_theta=32, n_phi=64), params)
    assert big == pytest.approx(lambda_correction_exact(0.1, 1.0), rel=1e-3)
    assert big / small == pytest.approx(2.0, rel=5e-2)
    assert lambda_correction(SphericalLayer(radius=0.1), KernelParams(lam=0.0)) == 0.0


@pytest.mark.parametrize("lam", [0.0, 4.0])
def test_self_interaction(lam):
    layer = SphericalLayer(radius=0.1, sigma=3.0, n_theta=64, n_phi=128)
    value = self_interaction_check(layer, 2.0, KernelParams(lam=lam))
    assert value == pytest.approx(self_interaction_exact(0.1, 2.0, lam), rel=5e-2)


def test_self_interaction_exact_limit():
    assert self_interaction_exact(0.1, 2.0, 0.0) == pytest.approx(0.2)
    assert self_interaction_exact(0.1, 2.0, 1e-12) == pytest.approx(0.2, rel=1e-6)


@pytest.mark.parametrize("r", [0.1, 1.0, 3.0])
def test_max_decay_factor(r):
    assert max_decay_factor(r) == pytest.approx(math.exp(-1.0) / r, rel=1e-12)


def test_tauberian_preconditions(coarse_grid, bump):
    q = build_q(coarse_grid, ZERO, ZERO, ZERO)
    with pytest.raises(ValueError):
        tauberian_study(coarse_grid, q, bump, [1.0, 0.5])
    with pytest.raises(ValueError):
        tauberian_study(coarse_grid, q, bump, [1.0, 0.5, 0.1])
    with pytest.raises(ValueError):
        tauberian_study(coarse_grid, q, bump, [0.25, 0.5, 1.0])


def test_tauberian_trivial(coarse_grid):
    q = build_q(coarse_grid, ZERO, ZERO, ZERO)
    report = tauberian_study(coarse_grid, q, ZERO, [1.0, 0.5, 0.25])
    assert all(row["error"] == 0.0 for row in report.rows)


def test_tauberian_error_decreases(unit_box, bump):
    grid = grid_partition(unit_box, 6)
    q = build_q(grid, ScalarField.constant(0.5), ScalarField.constant(4 * math.pi), bump)
    report = tauberian_study(grid, q, bump, [1.0, 0.25, 0.0625, 0.015625])
    errors = [row["error"] for row in report.rows[:-1]]
    assert errors == sorted(errors, reverse=True)
    assert report.rows[-1]["lambda"] == 0.0
    assert report.summary["extrapolated_error"] < 0.1 * errors[-1]
    assert report.summary["model"] == "sqrt"


def test_time_oracle_stability(coarse_grid, bump):
    q = build_q(coarse_grid, ZERO, ZERO, ZERO)
    bound = stability_bound(coarse_grid.spacing)
    assert bound == pytest.approx(0.25**2 / 6)
    with pytest.raises(StabilityError, match="stability bound"):
        time_domain_oracle(coarse_grid, q, bump, 1.0, 1.01 * bound)


def test_time_oracle_zero_source(coarse_grid):
    q = build_q(coarse_grid, ZERO, ZERO, ZERO)
    average = time_domain_oracle(coarse_grid, q, ZERO, 0.1, stability_bound(coarse_grid.spacing))
    np.testing.assert_array_equal(average, 0.0)


def test_time_oracle_approaches_steady_average(unit_box):
    grid = grid_partition(unit_box, 6)
    f = ScalarField.constant(1.0)
    q = build_q(grid, ZERO, ZERO, ZERO)
    psi = steady_average(grid, q, f, build_quadrature_table(grid, KernelParams(lam=0.0))).values
    horizon = default_horizon(grid, q)
    average = time_domain_oracle(grid, q, f, horizon, 0.9 * stability_bound(grid.spacing))
    assert np.linalg.norm(average - psi) / np.linalg.norm(psi) < 0.1


@pytest.mark.slow
def test_time_oracle_bump_acceptance(unit_box, bump):
    grid = grid_partition(unit_box, 12)
    N = ScalarField.gaussian(center=(0.5, 0.5, 0.5), width=0.2, amplitude=1.0)
    q = build_q(grid, ScalarField.constant(0.5), ScalarField.constant(4 * math.pi), N)
    psi = steady_average(grid, q, bump, build_quadrature_table(grid, KernelParams(lam=0.0))).values
    average = time_domain_oracle(grid, q, bump, default_horizon(grid, q), 0.9 * stability_bound(grid.spacing))
    assert np.linalg.norm(average - psi) / np.linalg.norm(psi) < 5e-2


def _zero_coupling_config(**overrides):
    values = {
        "N": {"kind": "constant", "value": 0.5},
        "h": {"kind": "constant", "value": 0.0},
        "f": {"kind": "gaussian", "center": [0.5, 0.5, 0.5], "width": 0.3, "amplitude": 1.0},
        "lambdas": [2.0],
        "seeds": 2,
        "a_schedule": [0.04, 0.02],
        "grid": 4,
    }
    values.update(overrides)
    return RunConfig.model_validate(values)


def test_convergence_without_coupling_is_exact():
    report = theorem1_convergence_study(_zero_coupling_config(), threads=2)
    assert [row["seed"] for row in report.rows] == [0, 1, 0, 1]
    assert all(row["discrepancy"] <= 1e-10 for row in report.rows)


def test_convergence_is_thread_independent():
    config = _zero_coupling_config(h={"kind": "constant", "value": 0.2}, a_schedule=[0.04])
    serial = theorem1_convergence_study(config, threads=1)
    parallel = theorem1_convergence_study(config, threads=2)
    assert [row["seed"] for row in parallel.rows] == [row["seed"] for row in serial.rows]
    for left, right in zip(serial.rows, parallel.rows):
        assert right["discrepancy"] == pytest.approx(left["discrepancy"], rel=1e-9)


# final seed-averaged discrepancy of configs/theorem1.json, frozen from the first passing run
THEOREM1_FINAL_DISCREPANCY = 6.066e-3


@pytest.mark.slow
def test_convergence_study_on_shipped_config():
    config = parse_config((CONFIGS / "theorem1.json").read_text())
    report = theorem1_convergence_study(config, threads=2)
    assert report.summary["monotone"]
    assert report.summary["mean_a=0.01"] < report.summary["mean_a=0.02"] < report.summary["mean_a=0.04"]
    assert report.summary["final_discrepancy"] <= 0.10
    assert report.summary["final_discrepancy"] == pytest.approx(THEOREM1_FINAL_DISCREPANCY, rel=1e-2)


@pytest.mark.slow
def test_tauberian_limit_on_shipped_bump():
    config = parse_config((CONFIGS / "default_bump.json").read_text())
    assert config.lambdas == [0.1, 0.05, 0.025, 0.0125]
    grid = grid_partition(config.domain, config.grid)
    q = build_q(grid, config.h, config.c, config.N)
    report = tauberian_study(grid, q, config.f, config.lambdas)
    assert report.summary["extrapolated_error"] <= 0.01
