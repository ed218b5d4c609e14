"""Grid, field, and tridiagonal solver tests against dense linear algebra."""

import math

import numpy as np
import pytest

from mcnspde import (
    Field,
    SolverError,
    SpatialGrid,
    TridiagonalOperator,
    apply_operator,
    build_discrete_laplacian,
    dirichlet_eigenvalue,
    h1_seminorm,
    identity_plus,
    l2_inner,
    l2_norm,
    sine_mode,
    solve_tridiagonal,
)


def dense_matrix(op):
    """Assemble the full K x K matrix from the three bands."""
    K = op.grid.K
    mat = np.zeros((K, K))
    mat[np.arange(K), np.arange(K)] = op.diag
    mat[np.arange(1, K), np.arange(K - 1)] = op.lower
    mat[np.arange(K - 1), np.arange(1, K)] = op.upper
    return mat


def random_dominant_operator(grid, rng):
    """Random tridiagonal matrix made strictly diagonally dominant."""
    K = grid.K
    lower = rng.standard_normal(K - 1)
    upper = rng.standard_normal(K - 1)
    diag = rng.standard_normal(K)
    slack = 1.0 + np.abs(rng.standard_normal(K))
    dom = np.zeros(K)
    dom[:-1] += np.abs(upper)
    dom[1:] += np.abs(lower)
    diag = np.sign(diag + (diag == 0)) * (dom + slack)
    return TridiagonalOperator(grid, lower, diag, upper)


def test_grid_geometry():
    grid = SpatialGrid(7)
    assert grid.h == pytest.approx(1.0 / 8.0, rel=1e-15)
    np.testing.assert_allclose(grid.nodes, np.arange(1, 8) / 8.0, rtol=1e-15)


def test_grid_rejects_too_few_nodes():
    with pytest.raises(ValueError):
        SpatialGrid(1)


def test_field_shape_checked():
    grid = SpatialGrid(5)
    with pytest.raises(ValueError):
        Field(grid, np.zeros(4))


def test_field_arithmetic():
    grid = SpatialGrid(6)
    rng = np.random.default_rng(11)
    f = Field(grid, rng.standard_normal(6))
    g = Field(grid, rng.standard_normal(6))
    np.testing.assert_allclose((f + g).values, f.values + g.values, rtol=1e-15)
    np.testing.assert_allclose((f - g).values, f.values - g.values, rtol=1e-15)
    np.testing.assert_allclose((2.5 * f).values, 2.5 * f.values, rtol=1e-15)
    np.testing.assert_allclose((-f).values, -f.values, rtol=1e-15)


def test_field_mixing_grids_rejected():
    f = Field(SpatialGrid(5), np.zeros(5))
    g = Field(SpatialGrid(6), np.zeros(6))
    with pytest.raises(ValueError):
        f + g


def test_from_function_samples_nodes():
    grid = SpatialGrid(9)
    f = Field.from_function(grid, lambda x: x * x)
    np.testing.assert_allclose(f.values, grid.nodes**2, rtol=1e-15)


def test_band_length_validation():
    grid = SpatialGrid(5)
    with pytest.raises(ValueError):
        TridiagonalOperator(grid, np.zeros(5), np.zeros(5), np.zeros(4))


def test_apply_matches_dense():
    grid = SpatialGrid(12)
    rng = np.random.default_rng(21)
    op = random_dominant_operator(grid, rng)
    f = Field(grid, rng.standard_normal(grid.K))
    expected = dense_matrix(op) @ f.values
    np.testing.assert_allclose(apply_operator(op, f).values, expected, rtol=1e-13)


@pytest.mark.parametrize("seed", range(8))
def test_thomas_matches_dense_solve(seed):
    """Elimination agrees with numpy's dense solver on dominant systems."""
    rng = np.random.default_rng(100 + seed)
    grid = SpatialGrid(int(rng.integers(2, 25)))
    op = random_dominant_operator(grid, rng)
    rhs = Field(grid, rng.standard_normal(grid.K))
    got = solve_tridiagonal(op, rhs).values
    expected = np.linalg.solve(dense_matrix(op), rhs.values)
    np.testing.assert_allclose(got, expected, rtol=1e-11, atol=1e-13)


def test_solve_then_apply_round_trip():
    grid = SpatialGrid(40)
    lap = build_discrete_laplacian(grid)
    system = identity_plus(lap, -0.01)
    rng = np.random.default_rng(3)
    rhs = Field(grid, rng.standard_normal(grid.K))
    x = solve_tridiagonal(system, rhs)
    np.testing.assert_allclose(apply_operator(system, x).values, rhs.values, rtol=1e-12)


def test_zero_pivot_raises():
    grid = SpatialGrid(4)
    op = TridiagonalOperator(grid, np.zeros(3), np.zeros(4), np.zeros(3))
    with pytest.raises(SolverError):
        solve_tridiagonal(op, Field(grid, np.ones(4)))


def test_pivot_failure_mid_sweep():
    # first pivot fine, second eliminated to zero: diag [1, 1], lower 1, upper 1
    grid = SpatialGrid(2)
    op = TridiagonalOperator(grid, np.array([1.0]), np.array([1.0, 1.0]), np.array([1.0]))
    with pytest.raises(SolverError):
        solve_tridiagonal(op, Field(grid, np.ones(2)))


def test_grid_mismatch_rejected():
    op = build_discrete_laplacian(SpatialGrid(5))
    f = Field(SpatialGrid(6), np.zeros(6))
    with pytest.raises(ValueError):
        apply_operator(op, f)
    with pytest.raises(ValueError):
        solve_tridiagonal(op, f)


def test_laplacian_eigenpairs():
    """Sine modes are exact eigenvectors of the second-difference operator."""
    grid = SpatialGrid(15)
    lap = build_discrete_laplacian(grid)
    for k in (1, 2, 3, 7, 15):
        mode = sine_mode(grid, k)
        lam = dirichlet_eigenvalue(grid, k)
        np.testing.assert_allclose(
            apply_operator(lap, mode).values, -lam * mode.values, rtol=1e-10, atol=1e-10
        )


def test_eigenvalue_small_h_limit():
    # (4/h^2) sin^2(k pi h/2) -> (k pi)^2 as the grid refines
    grid = SpatialGrid(799)
    for k in (1, 2, 3):
        lam = dirichlet_eigenvalue(grid, k)
        exact = (k * math.pi) ** 2
        # second-order accurate: relative gap is (k pi h)^2/12 plus higher order
        assert abs(lam - exact) / exact <= (k * math.pi * grid.h) ** 2 / 10.0
        assert abs(lam - exact) / exact >= (k * math.pi * grid.h) ** 2 / 14.0


def test_mode_index_bounds():
    grid = SpatialGrid(5)
    with pytest.raises(ValueError):
        sine_mode(grid, 0)
    with pytest.raises(ValueError):
        dirichlet_eigenvalue(grid, 6)


def test_identity_plus_algebra():
    grid = SpatialGrid(10)
    lap = build_discrete_laplacian(grid)
    rng = np.random.default_rng(5)
    f = Field(grid, rng.standard_normal(grid.K))
    shifted = identity_plus(lap, -0.3)
    expected = f.values - 0.3 * apply_operator(lap, f).values
    np.testing.assert_allclose(apply_operator(shifted, f).values, expected, rtol=1e-13)


def test_sine_mode_l2_norm_is_half():
    """h * sum_i sin^2(k pi x_i) = 1/2 exactly on the uniform grid."""
    grid = SpatialGrid(23)
    for k in (1, 2, 5, 23):
        assert l2_norm(sine_mode(grid, k)) == pytest.approx(math.sqrt(0.5), rel=1e-13)


def test_sine_modes_orthogonal():
    grid = SpatialGrid(16)
    assert l2_inner(sine_mode(grid, 2), sine_mode(grid, 3)) == pytest.approx(0.0, abs=1e-14)


def test_h1_seminorm_by_summation_by_parts():
    """|f|_{H1}^2 equals <-Lap f, f> for zero-boundary fields."""
    grid = SpatialGrid(17)
    lap = build_discrete_laplacian(grid)
    rng = np.random.default_rng(7)
    for _ in range(4):
        f = Field(grid, rng.standard_normal(grid.K))
        quad = -l2_inner(apply_operator(lap, f), f)
        assert h1_seminorm(f) ** 2 == pytest.approx(quad, rel=1e-12)


def test_h1_seminorm_of_sine_mode():
    grid = SpatialGrid(31)
    for k in (1, 4):
        lam = dirichlet_eigenvalue(grid, k)
        expected = math.sqrt(lam * 0.5)
        assert h1_seminorm(sine_mode(grid, k)) == pytest.approx(expected, rel=1e-12)
