"""Time steppers for the stochastic heat equation dX = Lap X dt + Phi dW.

Two one-step maps are provided on the spatially discretized equation:

* em_step: implicit Euler-Maruyama, strong order 1 in time for additive
  smooth noise,
* mcn_heat_step: Crank-Nicolson with a micro-grid quadrature correction,
  strong order 3/2.

Both solve a constant symmetric tridiagonal system per step.  The module
also carries the closed-form benchmark solution used by the convergence
harness: initial data sin(pi x) with one noise channel loading
sin(2 pi x) + sin(3 pi x), whose exact solution is a sum of three
eigenmode terms (one deterministic decay, two stochastic convolutions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grid import (
    Field,
    SpatialGrid,
    TridiagonalOperator,
    apply_operator,
    build_discrete_laplacian,
    dirichlet_eigenvalue,
    identity_plus,
    sine_mode,
    solve_tridiagonal,
)
from .noise import NoiseCoefficient, TimeMesh, WienerPath, heat_correction

SCHEME_EULER = "em"
SCHEME_MCN = "mcn"
EXACT_CONTINUOUS = "continuous"
EXACT_SEMIDISCRETE = "semidiscrete"

# Eigenmode layout of the benchmark problem: initial data on mode 1,
# noise loading modes 2 and 3 through a single Wiener channel.
BENCHMARK_INITIAL_MODE = 1
BENCHMARK_NOISE_MODES = (2, 3)


class ConfigError(Exception):
    """Raised for inconsistent problem or study configuration."""


@dataclass(frozen=True)
class HeatState:
    """Scheme iterate: coarse step index j and the field X_j."""

    j: int
    X: Field


@dataclass
class HeatProblem:
    """Spatially discretized heat equation with additive noise."""

    grid: SpatialGrid
    mesh: TimeMesh
    phi: NoiseCoefficient
    initial: Field

    def __post_init__(self) -> None:
        if self.phi.grid != self.grid or self.initial.grid != self.grid:
            raise ConfigError("noise coefficient and initial data must share the grid")

    @cached_property
    def laplacian(self) -> TridiagonalOperator:
        return build_discrete_laplacian(self.grid)

    @cached_property
    def euler_implicit(self) -> TridiagonalOperator:
        return identity_plus(self.laplacian, -self.mesh.tau)

    @cached_property
    def cn_implicit(self) -> TridiagonalOperator:
        return identity_plus(self.laplacian, -0.5 * self.mesh.tau)

    @cached_property
    def cn_explicit(self) -> TridiagonalOperator:
        return identity_plus(self.laplacian, +0.5 * self.mesh.tau)

    def initial_state(self) -> HeatState:
        return HeatState(0, self.initial)


def em_step(state: HeatState, path: WienerPath, problem: HeatProblem) -> HeatState:
    """One implicit Euler-Maruyama step: (I - tau Lap) X_{j+1} = X_j + Phi dW."""
    mesh = problem.mesh
    j = state.j
    dw = path.value_at(mesh.coarse_time(j + 1)) - path.value_at(mesh.coarse_time(j))
    rhs = Field(problem.grid, state.X.values + problem.phi.combine(dw))
    return HeatState(j + 1, solve_tridiagonal(problem.euler_implicit, rhs))


def mcn_heat_step(state: HeatState, path: WienerPath, problem: HeatProblem) -> HeatState:
    """One corrected Crank-Nicolson step.

    (I - tau/2 Lap) X_{j+1} = (I + tau/2 Lap) X_j + Phi dW + correction,
    where the correction replaces the trapezoid-in-time treatment of the
    noise with the micro-grid quadrature (see noise.heat_correction).
    """
    mesh = problem.mesh
    j = state.j
    dw = path.value_at(mesh.coarse_time(j + 1)) - path.value_at(mesh.coarse_time(j))
    corr = heat_correction(path, mesh, j, problem.phi)
    rhs = Field(
        problem.grid,
        apply_operator(problem.cn_explicit, state.X).values
        + problem.phi.combine(dw)
        + corr.values,
    )
    return HeatState(j + 1, solve_tridiagonal(problem.cn_implicit, rhs))


_STEPPERS = {SCHEME_EULER: em_step, SCHEME_MCN: mcn_heat_step}


def run_heat(problem: HeatProblem, path: WienerPath, scheme: str = SCHEME_MCN) -> Field:
    """March the chosen scheme over the whole mesh and return X_N at time T."""
    try:
        stepper = _STEPPERS[scheme]
    except KeyError:
        raise ConfigError(f"unknown scheme {scheme!r}; use 'em' or 'mcn'") from None
    state = problem.initial_state()
    for _ in range(problem.mesh.N):
        state = stepper(state, path, problem)
    return state.X


def stochastic_convolution(path: WienerPath, rate: float) -> np.ndarray:
    """Left-point Ito sum for int_0^T exp(-rate (T - s)) dW(s), shape (m,).

    The quadrature lives on the path's master grid, so its bias is a
    master-step effect, far below the coarse-step errors measured against
    it.
    """
    t_final = path.t_final
    left_times = path.delta * np.arange(path.S)
    weights = np.exp(-rate * (t_final - left_times))
    return weights @ path.increments


def benchmark_phi(grid: SpatialGrid, noise_scale: float = 1.0) -> NoiseCoefficient:
    """Single-channel coefficient scale * (sin(2 pi x) + sin(3 pi x))."""
    profile = sum(sine_mode(grid, k).values for k in BENCHMARK_NOISE_MODES)
    return NoiseCoefficient.from_components(grid, [noise_scale * profile])


def benchmark_heat_problem(
    grid: SpatialGrid, mesh: TimeMesh, noise_scale: float = 1.0
) -> HeatProblem:
    """Benchmark problem: X(0) = sin(pi x), one channel on modes 2 and 3."""
    return HeatProblem(
        grid, mesh, benchmark_phi(grid, noise_scale), sine_mode(grid, BENCHMARK_INITIAL_MODE)
    )


def exact_heat_solution(
    path: WienerPath,
    grid: SpatialGrid,
    t_final: float,
    mode: str = EXACT_CONTINUOUS,
    noise_scale: float = 1.0,
) -> Field:
    """Exact benchmark solution at time T evaluated on the grid.

    X(T) = exp(-mu_1 T) sin(pi x)
         + conv(mu_2) sin(2 pi x) + conv(mu_3) sin(3 pi x),

    with conv(mu) = int_0^T exp(-mu (T-s)) dW(s).  In 'continuous' mode the
    decay rates are the PDE eigenvalues (k pi)^2, so the comparison against
    a scheme includes the spatial discretization error; in 'semidiscrete'
    mode they are the discrete eigenvalues of the grid Laplacian and the
    comparison isolates the time-stepping error.  Requires a single-channel
    path (the benchmark noise drives both modes with one Wiener process).
    """
    if path.m != 1:
        raise ConfigError(f"benchmark exact solution needs m=1 noise, got m={path.m}")
    if abs(t_final - path.t_final) > 1e-12 * max(1.0, path.t_final):
        raise ConfigError(
            f"requested time {t_final} does not match the path horizon {path.t_final}"
        )
    if mode == EXACT_CONTINUOUS:
        rate = lambda k: (k * math.pi) ** 2
    elif mode == EXACT_SEMIDISCRETE:
        rate = lambda k: dirichlet_eigenvalue(grid, k)
    else:
        raise ConfigError(f"unknown exact mode {mode!r}")
    values = math.exp(-rate(BENCHMARK_INITIAL_MODE) * t_final) * sine_mode(
        grid, BENCHMARK_INITIAL_MODE
    ).values
    for k in BENCHMARK_NOISE_MODES:
        conv = float(stochastic_convolution(path, rate(k))[0])
        values = values + noise_scale * conv * sine_mode(grid, k).values
    return Field(grid, values)
