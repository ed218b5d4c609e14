"""Wiener paths on a dyadic master grid and micro-interval quadrature sums.

Time is discretized twice over.  A coarse mesh with step tau = T/N carries
the scheme iterates.  Each coarse interval [t_j, t_{j+1}] additionally
carries a micro grid t_{j,l} = t_j + l*tau^2, l = 0..M with M = 1/tau, so
the M micro steps of size tau^2 tile the interval exactly.  All path
values are read off a single master grid of S uniform steps; meshes are
only admissible when every micro node lands exactly on a master node
(S/N and S/(N*M) both integers), which keeps every quadrature in this
module interpolation-free.

Paths are sampled once per realization from a counter-based generator and
then shared by every scheme and every coarse resolution that is compared,
so refinement studies measure scheme error on a common noise sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import Field, SpatialGrid, apply_operator, build_discrete_laplacian

DEFAULT_MASTER_STEPS = 2**20

# Relative tolerance for deciding that a query time sits on a master node.
NODE_TOLERANCE = 1e-12


class AlignmentError(Exception):
    """Raised when a mesh/path combination would require interpolation."""


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TimeMesh:
    """Coarse mesh with N steps on [0, T] plus the tau^2 micro grid.

    Requires 1/tau to be a positive integer (with T = 1 that is just N);
    the micro count M = 1/tau then makes M steps of size tau^2 span one
    coarse step exactly.
    """

    N: int
    T: float = 1.0

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"need at least one step, got N={self.N}")
        if not self.T > 0.0:
            raise ValueError(f"final time must be positive, got T={self.T}")
        inv = 1.0 / self.tau
        if abs(inv - round(inv)) > 1e-9:
            raise ValueError(
                f"1/tau = {inv} is not an integer; the micro grid cannot tile a step"
            )

    @property
    def tau(self) -> float:
        return self.T / self.N

    @property
    def M(self) -> int:
        """Micro steps per coarse interval, M = 1/tau."""
        return round(1.0 / self.tau)

    def coarse_time(self, j: int) -> float:
        if not 0 <= j <= self.N:
            raise ValueError(f"coarse index must be in 0..{self.N}, got {j}")
        return j * self.tau

    def micro_time(self, j: int, ell: int) -> float:
        """Micro node t_{j,l} = t_j + l*tau^2 for l = 0..M."""
        if not 0 <= j < self.N:
            raise ValueError(f"interval index must be in 0..{self.N - 1}, got {j}")
        if not 0 <= ell <= self.M:
            raise ValueError(f"micro index must be in 0..{self.M}, got {ell}")
        return j * self.tau + ell * self.tau * self.tau

    def refined(self, n_new: int) -> "TimeMesh":
        return TimeMesh(n_new, self.T)


@dataclass(frozen=True)
class WienerPath:
    """One sampled m-dimensional Wiener path on the master grid.

    increments[k] is W(s_{k+1}) - W(s_k) and cumulative[k] is W(s_k) with
    W(0) = 0, where s_k = k*delta.  Values are only ever read at master
    nodes; value_at refuses anything farther than NODE_TOLERANCE*T from
    one.
    """

    increments: np.ndarray  # shape (S, m)
    cumulative: np.ndarray  # shape (S + 1, m)
    delta: float

    @property
    def S(self) -> int:
        return self.increments.shape[0]

    @property
    def m(self) -> int:
        return self.increments.shape[1]

    @property
    def t_final(self) -> float:
        return self.S * self.delta

    def node_index(self, t: float) -> int:
        """Master index of time t, or AlignmentError if t is off-grid."""
        k = round(t / self.delta)
        if not 0 <= k <= self.S or abs(t - k * self.delta) > NODE_TOLERANCE * self.t_final:
            raise AlignmentError(f"time {t!r} is not a master node (delta={self.delta!r})")
        return k

    def value_at(self, t: float) -> np.ndarray:
        """W(t) as an (m,) vector; t must sit on a master node."""
        return self.cumulative[self.node_index(t)]


def sample_path(
    seed: int,
    mesh: TimeMesh,
    m: int = 1,
    master_steps: int = DEFAULT_MASTER_STEPS,
) -> WienerPath:
    """Draw one Wiener path on the master grid, aligned with mesh.

    The generator is Philox keyed by seed, so paths are reproducible and
    distinct seeds give independent counter-based streams.
    """
    if m < 1:
        raise ValueError(f"need at least one noise component, got m={m}")
    if not _is_power_of_two(master_steps):
        raise AlignmentError(f"master step count must be a power of two, got {master_steps}")
    master_strides(mesh, master_steps)  # validate alignment up front
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    delta = mesh.T / master_steps
    rng = np.random.Generator(np.random.Philox(key=seed))
    increments = rng.standard_normal((master_steps, m)) * math.sqrt(delta)
    cumulative = np.zeros((master_steps + 1, m))
    np.cumsum(increments, axis=0, out=cumulative[1:])
    return WienerPath(increments, cumulative, delta)


def master_strides(mesh: TimeMesh, master_steps: int) -> tuple[int, int]:
    """(master steps per coarse step, master steps per micro step).

    Raises AlignmentError unless both are positive integers, i.e. unless
    every micro node of the mesh is a master node.
    """
    coarse = mesh.tau * master_steps / mesh.T
    micro = coarse / mesh.M
    if abs(coarse - round(coarse)) > 1e-9 or round(coarse) < 1:
        raise AlignmentError(
            f"coarse step is not a whole number of master steps (N={mesh.N}, S={master_steps})"
        )
    if abs(micro - round(micro)) > 1e-9 or round(micro) < 1:
        raise AlignmentError(
            f"micro step is not a whole number of master steps (N={mesh.N}, S={master_steps})"
        )
    return round(coarse), round(micro)


def _micro_indices(mesh: TimeMesh, path: WienerPath, j: int) -> np.ndarray:
    """Master indices of t_{j,1}..t_{j,M}."""
    if not 0 <= j < mesh.N:
        raise ValueError(f"interval index must be in 0..{mesh.N - 1}, got {j}")
    stride_coarse, stride_micro = master_strides(mesh, path.S)
    return j * stride_coarse + stride_micro * np.arange(1, mesh.M + 1)


def micro_values(path: WienerPath, mesh: TimeMesh, j: int) -> np.ndarray:
    """W at the interior micro nodes t_{j,1}..t_{j,M}, shape (M, m)."""
    return path.cumulative[_micro_indices(mesh, path, j)]


def micro_riemann_sum(path: WienerPath, mesh: TimeMesh, j: int) -> np.ndarray:
    """Right-point micro Riemann sum tau^2 * sum_{l=1}^{M} W(t_{j,l}), shape (m,).

    This is the micro-grid quadrature of int_{t_j}^{t_{j+1}} W(s) ds that
    the corrected schemes consume.
    """
    tau = mesh.tau
    return tau * tau * micro_values(path, mesh, j).sum(axis=0)


def micro_quadrature_defect(path: WienerPath, mesh: TimeMesh, j: int) -> np.ndarray:
    """Defect of the micro Riemann sum against int_{t_j}^{t_{j+1}} W(s) ds.

    The integral is approximated by a left-point Riemann sum on the master
    grid, so the master step must be well below tau^2 for the defect's
    second moment to be resolved; see defect_moment_exact for the target.
    Returns an (m,) vector.
    """
    stride_coarse, _ = master_strides(mesh, path.S)
    k0 = j * stride_coarse
    block = path.cumulative[k0 : k0 + stride_coarse]  # left points only
    integral = path.delta * block.sum(axis=0)
    return integral - micro_riemann_sum(path, mesh, j)


def defect_moment_exact(tau: float, m: int) -> float:
    """Exact E ||defect||^2 = (m/3) tau^5 for the micro quadrature defect."""
    if m < 0:
        raise ValueError(f"noise dimension must be nonnegative, got m={m}")
    return m / 3.0 * tau**5


def wave_micro_sum_moment_exact(mesh: TimeMesh, j: int, m: int) -> float:
    """Exact second moment of the weighted micro sum (tau^4/2) sum_l W(t_{j,l}).

    Equals (m tau^8 / 4) * sum_{l,l'} min(t_{j,l}, t_{j,l'}); the double sum
    collapses to a single pass because min(t_l, t_l') = t_l exactly
    2(M - l) + 1 times among the ordered pairs.
    """
    if not 0 <= j < mesh.N:
        raise ValueError(f"interval index must be in 0..{mesh.N - 1}, got {j}")
    if m < 0:
        raise ValueError(f"noise dimension must be nonnegative, got m={m}")
    tau, M = mesh.tau, mesh.M
    ells = np.arange(1, M + 1)
    times = j * tau + ells * tau * tau
    double_sum = float(np.dot(times, 2.0 * (M - ells) + 1.0))
    return m * tau**8 / 4.0 * double_sum


@dataclass(frozen=True)
class NoiseCoefficient:
    """Finite-dimensional noise coefficient Phi = (Phi_1 .. Phi_m).

    values[i] holds the grid samples of Phi_i and laplacian_values[i] the
    precomputed discrete Laplacian of Phi_i, which the corrected schemes
    apply against scalar path combinations every step.
    """

    grid: SpatialGrid
    values: np.ndarray  # shape (m, K)
    laplacian_values: np.ndarray  # shape (m, K)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_components(
        cls, grid: SpatialGrid, components: Sequence[np.ndarray | Field | Callable]
    ) -> "NoiseCoefficient":
        rows = []
        for comp in components:
            if callable(comp):
                comp = comp(grid.nodes)
            elif isinstance(comp, Field):
                comp = comp.values
            rows.append(np.asarray(comp, dtype=float))
        values = np.vstack(rows) if rows else np.zeros((0, grid.K))
        if values.shape[1:] != (grid.K,):
            raise ValueError(f"components must have {grid.K} values each")
        lap = build_discrete_laplacian(grid)
        lap_values = np.vstack(
            [apply_operator(lap, Field(grid, row)).values for row in values]
        ) if len(rows) else values.copy()
        return cls(grid, values, lap_values)

    def combine(self, weights: np.ndarray) -> np.ndarray:
        """sum_i Phi_i * weights_i as a (K,) array (e.g. Phi W(t), Phi dW)."""
        return self.values.T @ weights

    def combine_laplacian(self, weights: np.ndarray) -> np.ndarray:
        """sum_i (Lap Phi_i) * weights_i as a (K,) array."""
        return self.laplacian_values.T @ weights


def heat_correction(
    path: WienerPath, mesh: TimeMesh, j: int, phi: NoiseCoefficient
) -> Field:
    """Correction forcing for the modified Crank-Nicolson heat step.

    Lap[Phi (micro Riemann sum)] - (tau/2) Lap[Phi (W(t_{j+1}) + W(t_j))],
    assembled from the precomputed Laplacians of the noise components.
    Vanishes for paths constant on the interval.
    """
    tau = mesh.tau
    w_lo = path.value_at(mesh.coarse_time(j))
    w_hi = path.value_at(mesh.coarse_time(j + 1))
    weights = micro_riemann_sum(path, mesh, j) - 0.5 * tau * (w_lo + w_hi)
    return Field(phi.grid, phi.combine_laplacian(weights))


def wave_correction_displacement(
    path: WienerPath, mesh: TimeMesh, j: int, phi: NoiseCoefficient
) -> Field:
    """Correction entering the displacement update of the wave scheme.

    Phi (micro Riemann sum) - (tau/2) Phi (W(t_{j+1}) + W(t_j)); the same
    trapezoid-versus-micro-quadrature difference as the heat correction but
    without the Laplacian.
    """
    tau = mesh.tau
    w_lo = path.value_at(mesh.coarse_time(j))
    w_hi = path.value_at(mesh.coarse_time(j + 1))
    weights = micro_riemann_sum(path, mesh, j) - 0.5 * tau * (w_lo + w_hi)
    return Field(phi.grid, phi.combine(weights))


def wave_correction_velocity(
    path: WienerPath, mesh: TimeMesh, j: int, phi: NoiseCoefficient
) -> Field:
    """Correction entering the velocity update of the wave scheme.

    (1/2) sum_{l=1}^{M} (2 t_{j+1} - tau - 2 t_{j,l}) tau^2 Lap[Phi W(t_{j,l})].
    The weight simplifies to (tau^3/2)(1 - 2 l tau), independent of j.
    """
    tau = mesh.tau
    ells = np.arange(1, mesh.M + 1)
    weights = 0.5 * tau**3 * (1.0 - 2.0 * ells * tau)
    combined = weights @ micro_values(path, mesh, j)  # (m,)
    return Field(phi.grid, phi.combine_laplacian(combined))
