"""
Tests for the homogenized collocation solver and the steady average.
"""

import math

import numpy as np
import pytest

from app.models import BoxDomain, KernelParams, ScalarField, SolutionMode
from app.services.homogenized import (
    build_q,
    interpolate,
    neumann_series,
    newton_potential,
    operator_norm_bound,
    pde_residual,
    solve_homogenized,
    steady_average,
)
from app.services.kernel import build_quadrature_table
from app.services.medium import grid_partition

PARAMS = KernelParams(lam=1.0)
LAPLACE = KernelParams(lam=0.0)


def _q(grid, h=0.5):
    return build_q(grid, ScalarField.constant(h), ScalarField.constant(4 * math.pi), ScalarField.constant(1.0))


def test_build_q(coarse_grid):
    q = _q(coarse_grid, h=0.25)
    np.testing.assert_allclose(q.values, math.pi)
    assert q.is_nonnegative()


def test_zero_absorption_returns_source(coarse_grid, bump):
    table = build_quadrature_table(coarse_grid, PARAMS)
    solution = solve_homogenized(coarse_grid, _q(coarse_grid, h=0.0), bump, PARAMS, table)
    assert solution.mode == SolutionMode.LAPLACE
    G = table.weights @ bump.evaluate(coarse_grid.centers, coarse_grid.domain)
    np.testing.assert_allclose(solution.values, G / PARAMS.lam)


def test_matches_neumann_series(coarse_grid, bump):
    q = _q(coarse_grid, h=0.1)
    table = build_quadrature_table(coarse_grid, PARAMS)
    assert operator_norm_bound(table, q) < 0.5
    solution = solve_homogenized(coarse_grid, q, bump, PARAMS, table, scaled=True)
    G = table.weights @ bump.evaluate(coarse_grid.centers, coarse_grid.domain)
    np.testing.assert_allclose(neumann_series(table, q, G, 60), solution.values, rtol=1e-10)


def test_absorption_lowers_the_field(coarse_grid):
    f = ScalarField.constant(1.0)
    table = build_quadrature_table(coarse_grid, PARAMS)
    free = solve_homogenized(coarse_grid, _q(coarse_grid, h=0.0), f, PARAMS, table)
    absorbed = solve_homogenized(coarse_grid, _q(coarse_grid, h=0.1), f, PARAMS, table)
    assert np.all(absorbed.values < free.values)
    assert np.all(absorbed.values > 0.0)


def test_laplace_mode_needs_positive_lambda(coarse_grid, bump):
    table = build_quadrature_table(coarse_grid, LAPLACE)
    with pytest.raises(ValueError):
        solve_homogenized(coarse_grid, _q(coarse_grid), bump, LAPLACE, table)


def test_table_must_match_lambda(coarse_grid, bump):
    table = build_quadrature_table(coarse_grid, PARAMS)
    with pytest.raises(ValueError):
        steady_average(coarse_grid, _q(coarse_grid), bump, table)


def test_scaled_solution_at_zero_lambda_is_steady_average(coarse_grid, bump):
    table = build_quadrature_table(coarse_grid, LAPLACE)
    q = _q(coarse_grid)
    psi = steady_average(coarse_grid, q, bump, table)
    W = solve_homogenized(coarse_grid, q, bump, LAPLACE, table, scaled=True)
    assert psi.mode == SolutionMode.STEADY
    np.testing.assert_allclose(W.values, psi.values, rtol=1e-12)


def test_steady_average_without_absorption(coarse_grid, bump):
    table = build_quadrature_table(coarse_grid, LAPLACE)
    psi = steady_average(coarse_grid, _q(coarse_grid, h=0.0), bump, table)
    np.testing.assert_allclose(psi.values, newton_potential(coarse_grid, bump, table))


def test_interpolation_at_nodes(coarse_grid, bump):
    q = _q(coarse_grid)
    table = build_quadrature_table(coarse_grid, PARAMS)
    solution = solve_homogenized(coarse_grid, q, bump, PARAMS, table)
    np.testing.assert_allclose(interpolate(solution, q, bump, coarse_grid.centers), solution.values, rtol=1e-9)
    off_grid = interpolate(solution, q, bump, np.array([[0.5, 0.5, 0.5], [0.05, 0.9, 0.4]]))
    assert off_grid.shape == (2,)
    assert np.all(np.isfinite(off_grid))


def test_pde_residual(unit_box, bump):
    coarse = grid_partition(unit_box, 3)
    table = build_quadrature_table(coarse, PARAMS)
    solution = solve_homogenized(coarse, _q(coarse), bump, PARAMS, table)
    with pytest.raises(ValueError):
        pde_residual(solution, _q(coarse), bump)

    grids = [grid_partition(unit_box, n) for n in (6, 10)]
    residuals = []
    for grid in grids:
        q = _q(grid)
        solution = solve_homogenized(grid, q, bump, PARAMS, build_quadrature_table(grid, PARAMS))
        residuals.append(pde_residual(solution, q, bump))
    assert residuals[1] < residuals[0]


def test_truncated_series_bounds(coarse_grid, bump):
    """Below a norm bound of 0.3 the truncated series agree to the tail bound."""
    q = _q(coarse_grid, h=0.1)
    table = build_quadrature_table(coarse_grid, PARAMS)
    beta = operator_norm_bound(table, q)
    assert beta < 0.3
    G = table.weights @ bump.evaluate(coarse_grid.centers, coarse_grid.domain)
    W = solve_homogenized(coarse_grid, q, bump, PARAMS, table, scaled=True).values
    scale = np.max(np.abs(G))
    for terms in (2, 6):
        tail = np.max(np.abs(W - neumann_series(table, q, G, terms)))
        assert tail <= beta**terms / (1 - beta) * scale


def test_steady_average_two_term_series(coarse_grid, bump):
    q = _q(coarse_grid, h=0.05)
    table = build_quadrature_table(coarse_grid, LAPLACE)
    beta = operator_norm_bound(table, q)
    phi = newton_potential(coarse_grid, bump, table)
    psi = steady_average(coarse_grid, q, bump, table).values
    two_term = phi - (table.weights * q.values[None, :]) @ phi
    assert np.max(np.abs(psi - two_term)) <= beta**2 / (1 - beta) * np.max(np.abs(phi))


@pytest.mark.parametrize(
    "solve",
    [
        lambda grid, q, f: solve_homogenized(grid, q, f, PARAMS, build_quadrature_table(grid, PARAMS)).values,
        lambda grid, q, f: solve_homogenized(
            grid, q, f, LAPLACE, build_quadrature_table(grid, LAPLACE), scaled=True
        ).values,
        lambda grid, q, f: steady_average(grid, q, f, build_quadrature_table(grid, LAPLACE)).values,
    ],
    ids=["laplace", "scaled", "steady"],
)
def test_solutions_are_linear_in_f(coarse_grid, bump, solve):
    q = _q(coarse_grid)
    s = 2.5
    np.testing.assert_allclose(solve(coarse_grid, q, bump.scaled(s)), s * solve(coarse_grid, q, bump), rtol=1e-12)


def test_residual_ignores_an_empty_margin():
    """Padding the box with absorption-free, source-free cells leaves the residual unchanged."""
    narrow = ScalarField.gaussian(center=(0.5, 0.5, 0.5), width=0.1, amplitude=1.0)
    residuals = []
    for box, n in ((BoxDomain(), 6), (BoxDomain(lo=(-1 / 3,) * 3, hi=(4 / 3,) * 3), 10)):
        grid = grid_partition(box, n)
        q = build_q(grid, ScalarField.constant(0.5), ScalarField.constant(4 * math.pi), narrow)
        solution = solve_homogenized(grid, q, narrow, PARAMS, build_quadrature_table(grid, PARAMS))
        residuals.append(pde_residual(solution, q, narrow))
    assert residuals[1] == pytest.approx(residuals[0], rel=1e-4)
