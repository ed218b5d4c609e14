"""Monte Carlo strong-convergence studies and their tabulated results.

A study fixes the benchmark problem, a list of coarse resolutions, and a
realization count.  Every realization draws one Wiener path on the master
grid (seeded from base_seed and the realization index, so reruns and
worker splits reproduce bit-identical tables) and runs every resolution
against that same path; the root-mean-square final-time error per
resolution then feeds a log-log least-squares rate fit.

Heat studies measure against the closed-form benchmark solution, either
with continuous-spectrum decay rates (total error, floored by the spatial
discretization) or semidiscrete rates (pure time-stepping error).  Wave
studies measure against the same scheme on a much finer mesh.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .grid import Field, SpatialGrid, h1_seminorm, l2_norm
from .heat import (
    ConfigError,
    EXACT_CONTINUOUS,
    EXACT_SEMIDISCRETE,
    SCHEME_EULER,
    SCHEME_MCN,
    benchmark_heat_problem,
    exact_heat_solution,
    run_heat,
)
from .noise import TimeMesh, sample_path
from .wave import benchmark_wave_problem, reference_wave_solution, run_wave

EQUATION_HEAT = "heat"
EQUATION_WAVE = "wave"

NORM_L2 = "l2"
NORM_H1_DISPLACEMENT = "h1_displacement"
NORM_L2_VELOCITY = "l2_velocity"

HEAT_NORMS = (NORM_L2,)
WAVE_NORMS = (NORM_H1_DISPLACEMENT, NORM_L2_VELOCITY)

CSV_HEADER = "N,tau,rms_error,standard_error"

# Rows whose error sits within this factor of the measured spatial floor
# are dropped from the default rate fit: they measure the grid, not the
# time stepper.
FLOOR_EXCLUSION_FACTOR = 3.0


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class StudyConfig:
    """Complete description of one convergence study.

    Defaults give the quick desk-scale heat study; see desk_wave_config
    and the paper_* factories for the other stock configurations.
    """

    equation: str = EQUATION_HEAT
    scheme: str = SCHEME_MCN
    n_list: tuple[int, ...] = (8, 16, 32, 64, 128, 256)
    k: int = 40
    t_final: float = 1.0
    mc_count: int = 500
    base_seed: int = 20260814
    master_steps: int = 2**16
    n_ref: int = 1024
    exact_mode: str = EXACT_CONTINUOUS
    error_norm: str = NORM_L2
    noise_scale: float = 1.0
    workers: int = 1


def desk_heat_config(**overrides) -> StudyConfig:
    """Quick heat study: N in 8..256, 500 realizations, 2^16 master steps."""
    return dataclasses.replace(StudyConfig(), **overrides)


def desk_wave_config(**overrides) -> StudyConfig:
    """Quick wave study: N in 8..128 against N_ref = 1024, 300 realizations."""
    base = StudyConfig(
        equation=EQUATION_WAVE,
        n_list=(8, 16, 32, 64, 128),
        mc_count=300,
        master_steps=2**20,
        n_ref=1024,
        error_norm=NORM_H1_DISPLACEMENT,
    )
    return dataclasses.replace(base, **overrides)


def paper_heat_config(**overrides) -> StudyConfig:
    """Full-scale heat study: N in 4..1024, 1000 realizations, 2^20 master steps."""
    base = StudyConfig(
        n_list=(4, 8, 16, 32, 64, 128, 256, 512, 1024),
        mc_count=1000,
        master_steps=2**20,
    )
    return dataclasses.replace(base, **overrides)


def paper_wave_config(**overrides) -> StudyConfig:
    """Full-scale wave study: N in 4..1024 against N_ref = 4096, 2^24 master steps."""
    base = StudyConfig(
        equation=EQUATION_WAVE,
        n_list=(4, 8, 16, 32, 64, 128, 256, 512, 1024),
        mc_count=1000,
        master_steps=2**24,
        n_ref=4096,
        error_norm=NORM_H1_DISPLACEMENT,
    )
    return dataclasses.replace(base, **overrides)


def study_norms(config: StudyConfig) -> tuple[str, ...]:
    return HEAT_NORMS if config.equation == EQUATION_HEAT else WAVE_NORMS


def validate_config(config: StudyConfig) -> None:
    """Raise ConfigError on any inconsistent study setting."""
    if config.equation not in (EQUATION_HEAT, EQUATION_WAVE):
        raise ConfigError(f"unknown equation {config.equation!r}")
    if not config.n_list:
        raise ConfigError("n_list must not be empty")
    if list(config.n_list) != sorted(set(config.n_list)):
        raise ConfigError("n_list must be strictly increasing")
    for n in config.n_list:
        if not _is_power_of_two(n):
            raise ConfigError(f"coarse resolutions must be powers of two, got {n}")
    if not _is_power_of_two(config.master_steps):
        raise ConfigError(f"master_steps must be a power of two, got {config.master_steps}")
    if config.k < 2:
        raise ConfigError(f"need at least 2 interior nodes, got k={config.k}")
    if config.mc_count < 1:
        raise ConfigError(f"need at least one realization, got {config.mc_count}")
    if config.base_seed < 0:
        raise ConfigError(f"base_seed must be nonnegative, got {config.base_seed}")
    if config.workers < 1:
        raise ConfigError(f"workers must be positive, got {config.workers}")
    if not config.t_final > 0:
        raise ConfigError(f"t_final must be positive, got {config.t_final}")
    if config.noise_scale < 0:
        raise ConfigError(f"noise_scale must be nonnegative, got {config.noise_scale}")
    n_max = max(config.n_list)
    if n_max * n_max > config.master_steps:
        raise ConfigError(
            f"micro grid of N={n_max} needs at least N^2={n_max * n_max} master steps, "
            f"got {config.master_steps}"
        )
    if config.equation == EQUATION_HEAT:
        if config.scheme not in (SCHEME_EULER, SCHEME_MCN):
            raise ConfigError(f"unknown scheme {config.scheme!r}")
        if config.exact_mode not in (EXACT_CONTINUOUS, EXACT_SEMIDISCRETE):
            raise ConfigError(f"unknown exact mode {config.exact_mode!r}")
        if config.error_norm not in HEAT_NORMS:
            raise ConfigError(f"heat studies report norms {HEAT_NORMS}, got {config.error_norm!r}")
    else:
        if config.scheme != SCHEME_MCN:
            raise ConfigError("wave studies run the corrected Crank-Nicolson scheme only")
        if config.error_norm not in WAVE_NORMS:
            raise ConfigError(f"wave studies report norms {WAVE_NORMS}, got {config.error_norm!r}")
        if not _is_power_of_two(config.n_ref):
            raise ConfigError(f"n_ref must be a power of two, got {config.n_ref}")
        if config.n_ref < n_max:
            raise ConfigError(f"n_ref={config.n_ref} is coarser than the finest study mesh {n_max}")
        if config.n_ref * config.n_ref > config.master_steps:
            raise ConfigError(
                f"reference micro grid needs {config.n_ref ** 2} master steps, "
                f"got {config.master_steps}"
            )


@dataclass(frozen=True)
class TableRow:
    n_steps: int
    tau: float
    rms_error: float
    standard_error: float


@dataclass(frozen=True)
class ConvergenceTable:
    """RMS errors per resolution plus the fitted log-log rate."""

    equation: str
    scheme: str
    error_norm: str
    rows: tuple[TableRow, ...]
    fitted_rate: float
    fit_range: tuple[int, ...]
    spatial_floor: float | None = None
    fit_note: str = ""


def rms_and_standard_error(squared_errors: np.ndarray) -> tuple[float, float]:
    """RMS of per-realization squared errors and its delta-method standard error.

    The RMS is sqrt(mean of squares); its standard error follows from the
    standard error of the mean square divided by the derivative 2*RMS.
    Degenerate cases (one sample, or identically zero error) report 0.
    """
    sq = np.asarray(squared_errors, dtype=float)
    mean_sq = float(sq.mean())
    rms = math.sqrt(mean_sq)
    if sq.size < 2 or rms == 0.0:
        return rms, 0.0
    se_mean = float(sq.std(ddof=1)) / math.sqrt(sq.size)
    return rms, se_mean / (2.0 * rms)


def fit_rate(table: ConvergenceTable, fit_range: Sequence[int] | None = None) -> float:
    """Least-squares slope of log2(error) against log2(tau) over fit_range.

    fit_range lists the resolutions to include; None uses the range the
    study selected.  Requires at least two rows and strictly positive
    errors.
    """
    wanted = tuple(table.fit_range if fit_range is None else fit_range)
    rows = [row for row in table.rows if row.n_steps in wanted]
    if len(rows) < 2:
        raise ValueError(f"rate fit needs at least two resolutions, got {len(rows)}")
    if any(row.rms_error <= 0.0 for row in rows):
        raise ValueError("rate fit needs strictly positive errors")
    log_tau = np.log2([row.tau for row in rows])
    log_err = np.log2([row.rms_error for row in rows])
    return float(np.polyfit(log_tau, log_err, 1)[0])


def _default_fit_range(
    rows: Sequence[TableRow], spatial_floor: float | None
) -> tuple[tuple[int, ...], str]:
    """Default fit range: drop the coarsest row, then floor-dominated rows.

    Degenerate studies stay usable: with two resolutions the coarsest row
    is kept, and a single-resolution table gets an empty range (the rate
    is then reported as nan).
    """
    candidates = [row for row in rows[1:]]
    if len(candidates) < 2:
        if len(rows) >= 2:
            return tuple(row.n_steps for row in rows), "kept the coarsest row: only two resolutions"
        return (), "rate not fitted: needs at least two resolutions"
    if spatial_floor is not None and spatial_floor > 0.0:
        kept = [
            row
            for row in candidates
            if row.rms_error > FLOOR_EXCLUSION_FACTOR * spatial_floor
        ]
        if len(kept) >= 2:
            dropped = len(candidates) - len(kept)
            note = f"dropped {dropped} floor-dominated rows" if dropped else ""
            return tuple(row.n_steps for row in kept), note
        return (
            tuple(row.n_steps for row in candidates),
            "floor filter skipped: too few rows would remain",
        )
    return tuple(row.n_steps for row in candidates), ""


def _build_problems(config: StudyConfig):
    grid = SpatialGrid(config.k)
    problems = []
    for n in config.n_list:
        mesh = TimeMesh(n, config.t_final)
        if config.equation == EQUATION_HEAT:
            problems.append(benchmark_heat_problem(grid, mesh, config.noise_scale))
        else:
            problems.append(benchmark_wave_problem(grid, mesh, config.noise_scale))
    return grid, problems


def _chunk_squared_errors(config: StudyConfig, r_lo: int, r_hi: int):
    """Per-realization squared errors for realizations r_lo..r_hi-1.

    Returns (errors, floors) with errors shaped (r_hi - r_lo, n_list, norms)
    and floors the squared continuous-vs-semidiscrete oracle gap (heat
    continuous mode only, else None).
    """
    grid, problems = _build_problems(config)
    norms = study_norms(config)
    path_mesh = TimeMesh(
        max(config.n_list) if config.equation == EQUATION_HEAT else config.n_ref,
        config.t_final,
    )
    errors = np.empty((r_hi - r_lo, len(problems), len(norms)))
    want_floor = config.equation == EQUATION_HEAT and config.exact_mode == EXACT_CONTINUOUS
    floors = np.empty(r_hi - r_lo) if want_floor else None
    for i, r in enumerate(range(r_lo, r_hi)):
        path = sample_path(config.base_seed ^ r, path_mesh, m=1, master_steps=config.master_steps)
        if config.equation == EQUATION_HEAT:
            oracle = exact_heat_solution(
                path, grid, config.t_final, config.exact_mode, config.noise_scale
            )
            if want_floor:
                semi = exact_heat_solution(
                    path, grid, config.t_final, EXACT_SEMIDISCRETE, config.noise_scale
                )
                floors[i] = l2_norm(oracle - semi) ** 2
            for p, problem in enumerate(problems):
                final = run_heat(problem, path, config.scheme)
                errors[i, p, 0] = l2_norm(final - oracle) ** 2
        else:
            x_ref, y_ref = reference_wave_solution(problems[-1], path, config.n_ref)
            for p, problem in enumerate(problems):
                x_end, y_end = run_wave(problem, path)
                errors[i, p, 0] = h1_seminorm(x_end - x_ref) ** 2
                errors[i, p, 1] = l2_norm(y_end - y_ref) ** 2
    return errors, floors


def _gather_squared_errors(config: StudyConfig):
    mc = config.mc_count
    if config.workers <= 1 or mc == 1:
        return _chunk_squared_errors(config, 0, mc)
    n_chunks = min(mc, config.workers * 4)
    bounds = np.linspace(0, mc, n_chunks + 1).astype(int)
    spans = [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    errors_parts: list[np.ndarray | None] = [None] * len(spans)
    floors_parts: list[np.ndarray | None] = [None] * len(spans)
    with concurrent.futures.ProcessPoolExecutor(max_workers=config.workers) as pool:
        futures = {
            pool.submit(_chunk_squared_errors, config, lo, hi): idx
            for idx, (lo, hi) in enumerate(spans)
        }
        for future in concurrent.futures.as_completed(futures):
            idx = futures[future]
            errors_parts[idx], floors_parts[idx] = future.result()
    errors = np.concatenate(errors_parts, axis=0)
    floors = (
        np.concatenate([f for f in floors_parts])
        if floors_parts[0] is not None
        else None
    )
    return errors, floors


def run_study_tables(config: StudyConfig) -> dict[str, ConvergenceTable]:
    """Run the study once and return a table for every norm it measures."""
    validate_config(config)
    errors, floors = _gather_squared_errors(config)
    norms = study_norms(config)
    spatial_floor = math.sqrt(float(floors.mean())) if floors is not None else None
    t_final = config.t_final
    tables = {}
    for q, norm in enumerate(norms):
        rows = []
        for p, n in enumerate(config.n_list):
            rms, se = rms_and_standard_error(errors[:, p, q])
            rows.append(TableRow(n, t_final / n, rms, se))
        rows = tuple(rows)
        fit_range, note = _default_fit_range(rows, spatial_floor)
        table = ConvergenceTable(
            equation=config.equation,
            scheme=config.scheme,
            error_norm=norm,
            rows=rows,
            fitted_rate=float("nan"),
            fit_range=fit_range,
            spatial_floor=spatial_floor,
            fit_note=note,
        )
        if len(fit_range) >= 2:
            table = dataclasses.replace(table, fitted_rate=fit_rate(table))
        tables[norm] = table
    return tables


def run_study(config: StudyConfig) -> ConvergenceTable:
    """Run the study and return the table for config.error_norm."""
    return run_study_tables(config)[config.error_norm]


def _format_value(x: float) -> str:
    # Positional decimal with 17 significant digits: plenty beyond the
    # required precision and reparses to the identical double.
    return np.format_float_positional(x, precision=17, unique=False, fractional=False)


def csv_text(table: ConvergenceTable) -> str:
    lines = [CSV_HEADER]
    for row in table.rows:
        lines.append(
            f"{row.n_steps},{_format_value(row.tau)},"
            f"{_format_value(row.rms_error)},{_format_value(row.standard_error)}"
        )
    return "\n".join(lines) + "\n"


def emit_csv(table: ConvergenceTable, destination: str | Path) -> None:
    Path(destination).write_text(csv_text(table))


def read_csv(source: str | Path) -> tuple[TableRow, ...]:
    """Parse a table written by emit_csv back into rows."""
    lines = Path(source).read_text().strip().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"not a convergence table: bad header in {source}")
    rows = []
    for line in lines[1:]:
        n_s, tau_s, rms_s, se_s = line.split(",")
        rows.append(TableRow(int(n_s), float(tau_s), float(rms_s), float(se_s)))
    return tuple(rows)


def report_text(table: ConvergenceTable, config: StudyConfig | None = None) -> str:
    """Human-readable study summary: configuration, table, fitted rate."""
    out = []
    out.append(f"equation:       {table.equation}")
    out.append(f"scheme:         {table.scheme}")
    out.append(f"error norm:     {table.error_norm}")
    if config is not None:
        out.append(f"interior nodes: {config.k}")
        out.append(f"final time:     {config.t_final}")
        out.append(f"realizations:   {config.mc_count}")
        out.append(f"base seed:      {config.base_seed}")
        out.append(f"master steps:   {config.master_steps}")
        if config.equation == EQUATION_HEAT:
            out.append(f"exact mode:     {config.exact_mode}")
        else:
            out.append(f"reference N:    {config.n_ref}")
    out.append("")
    out.append(f"{'N':>6s} {'tau':>12s} {'rms_error':>14s} {'std_error':>14s}")
    for row in table.rows:
        out.append(
            f"{row.n_steps:>6d} {row.tau:>12.6g} {row.rms_error:>14.6e} "
            f"{row.standard_error:>14.6e}"
        )
    out.append("")
    if table.spatial_floor is not None:
        out.append(f"spatial error floor: {table.spatial_floor:.6e}")
    out.append(f"fit range (N):       {', '.join(str(n) for n in table.fit_range)}")
    if table.fit_note:
        out.append(f"fit note:            {table.fit_note}")
    out.append(f"fitted rate:         {table.fitted_rate:.4f}")
    return "\n".join(out) + "\n"


def emit_report(
    table: ConvergenceTable, destination: str | Path, config: StudyConfig | None = None
) -> None:
    Path(destination).write_text(report_text(table, config))
