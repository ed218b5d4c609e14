"""Uniform spatial grid on (0, 1) with homogeneous Dirichlet boundaries.

The interior nodes are x_i = i*h, i = 1..K, h = 1/(K+1).  Fields store
interior values only; the boundary values are identically zero and never
materialized.  The second-difference Laplacian and the shifted systems
(I + c*Lap) that the time steppers solve are all symmetric tridiagonal,
so a direct Thomas elimination is used throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Pivots smaller than this abort the elimination: the system is treated
# as numerically singular rather than silently amplifying roundoff.
PIVOT_FLOOR = 1e-14


class SolverError(Exception):
    """Raised when tridiagonal elimination hits a vanishing pivot."""


@dataclass(frozen=True)
class SpatialGrid:
    """Interior of (0, 1) sampled at K equispaced nodes."""

    K: int

    def __post_init__(self) -> None:
        if self.K < 2:
            raise ValueError(f"need at least 2 interior nodes, got K={self.K}")

    @property
    def h(self) -> float:
        return 1.0 / (self.K + 1)

    @property
    def nodes(self) -> np.ndarray:
        """Interior node coordinates x_i = i*h, shape (K,)."""
        return self.h * np.arange(1, self.K + 1)


@dataclass(frozen=True)
class Field:
    """Grid function on the interior nodes (boundary values are zero)."""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.K,):
            raise ValueError(
                f"field needs {self.grid.K} interior values, got shape {values.shape}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: SpatialGrid) -> "Field":
        return cls(grid, np.zeros(grid.K))

    @classmethod
    def from_function(cls, grid: SpatialGrid, f) -> "Field":
        return cls(grid, np.asarray(f(grid.nodes), dtype=float))

    def _check_same_grid(self, other: "Field") -> None:
        if self.grid != other.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)


@dataclass(frozen=True)
class TridiagonalOperator:
    """Real tridiagonal matrix acting on fields of a fixed grid."""

    grid: SpatialGrid
    lower: np.ndarray  # sub-diagonal, length K-1
    diag: np.ndarray  # main diagonal, length K
    upper: np.ndarray  # super-diagonal, length K-1

    def __post_init__(self) -> None:
        K = self.grid.K
        lower = np.asarray(self.lower, dtype=float)
        diag = np.asarray(self.diag, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if diag.shape != (K,) or lower.shape != (K - 1,) or upper.shape != (K - 1,):
            raise ValueError("band lengths must be K-1, K, K-1")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "upper", upper)


def build_discrete_laplacian(grid: SpatialGrid) -> TridiagonalOperator:
    """Second-difference Laplacian (f_{i-1} - 2 f_i + f_{i+1}) / h^2.

    Dirichlet boundaries are built in: the stencil sees zero outside the
    interior band.  The operator is symmetric negative definite with
    eigenvectors sin(k*pi*x_i) and eigenvalues -(4/h^2) sin^2(k*pi*h/2).
    """
    K, h = grid.K, grid.h
    off = np.full(K - 1, 1.0 / h**2)
    diag = np.full(K, -2.0 / h**2)
    return TridiagonalOperator(grid, off, diag, off.copy())


def identity_plus(op: TridiagonalOperator, scale: float) -> TridiagonalOperator:
    """Tridiagonal matrix I + scale * op on the same grid."""
    return TridiagonalOperator(
        op.grid,
        scale * op.lower,
        1.0 + scale * op.diag,
        scale * op.upper,
    )


def apply_operator(op: TridiagonalOperator, f: Field) -> Field:
    """Matrix-vector product op @ f."""
    if op.grid != f.grid:
        raise ValueError("operator and field live on different grids")
    v = f.values
    out = op.diag * v
    out[:-1] += op.upper * v[1:]
    out[1:] += op.lower * v[:-1]
    return Field(f.grid, out)


def solve_tridiagonal(op: TridiagonalOperator, rhs: Field) -> Field:
    """Solve op @ x = rhs by Thomas elimination (forward sweep, back substitution).

    Raises SolverError if any pivot magnitude falls below PIVOT_FLOOR.  The
    systems stepped in this package are strictly diagonally dominant, so a
    failure here indicates a misconstructed operator rather than roundoff.
    """
    if op.grid != rhs.grid:
        raise ValueError("operator and right-hand side live on different grids")
    n = op.grid.K
    # Plain Python lists keep the sequential sweep cheap at the K ~ 40
    # sizes this package runs; the arrays are tiny.
    a = op.lower.tolist()
    b = op.diag.tolist()
    c = op.upper.tolist()
    d = rhs.values.tolist()
    for i in range(1, n):
        piv = b[i - 1]
        if abs(piv) < PIVOT_FLOOR:
            raise SolverError(f"pivot {piv!r} at row {i - 1} below {PIVOT_FLOOR}")
        w = a[i - 1] / piv
        b[i] -= w * c[i - 1]
        d[i] -= w * d[i - 1]
    if abs(b[-1]) < PIVOT_FLOOR:
        raise SolverError(f"pivot {b[-1]!r} at row {n - 1} below {PIVOT_FLOOR}")
    x = [0.0] * n
    x[-1] = d[-1] / b[-1]
    for i in range(n - 2, -1, -1):
        x[i] = (d[i] - c[i] * x[i + 1]) / b[i]
    return Field(rhs.grid, np.array(x))


def dirichlet_eigenvalue(grid: SpatialGrid, k: int) -> float:
    """k-th eigenvalue of the negative discrete Laplacian, (4/h^2) sin^2(k pi h / 2)."""
    if not 1 <= k <= grid.K:
        raise ValueError(f"mode index must be in 1..{grid.K}, got {k}")
    h = grid.h
    s = math.sin(0.5 * k * math.pi * h)
    return 4.0 / h**2 * s * s


def sine_mode(grid: SpatialGrid, k: int) -> Field:
    """Grid samples of sin(k pi x), the k-th discrete Laplacian eigenvector."""
    if not 1 <= k <= grid.K:
        raise ValueError(f"mode index must be in 1..{grid.K}, got {k}")
    return Field(grid, np.sin(k * math.pi * grid.nodes))


def l2_inner(f: Field, g: Field) -> float:
    """Discrete L2 inner product h * sum(f_i g_i)."""
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    return f.grid.h * float(np.dot(f.values, g.values))


def l2_norm(f: Field) -> float:
    """Discrete L2 norm sqrt(h * sum f_i^2)."""
    return math.sqrt(f.grid.h * float(np.dot(f.values, f.values)))


def h1_seminorm(f: Field) -> float:
    """Discrete H1 seminorm sqrt(h * sum ((f_{i+1} - f_i)/h)^2) including boundary jumps."""
    h = f.grid.h
    diffs = np.diff(f.values, prepend=0.0, append=0.0) / h
    return math.sqrt(h * float(np.dot(diffs, diffs)))
