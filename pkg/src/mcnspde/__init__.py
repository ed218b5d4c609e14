"""Strong-order time stepping for stochastic heat and wave equations.

One-dimensional heat and wave equations on (0, 1) with homogeneous
Dirichlet boundaries and additive finite-dimensional Wiener noise,
discretized by second differences in space.  The time steppers augment
the Crank-Nicolson rule with micro-grid quadrature corrections of the
noise, lifting the strong order to 3/2 (heat) and 2 (wave); an implicit
Euler-Maruyama baseline is included.  A Monte Carlo harness measures the
strong errors on shared noise samples and fits convergence rates, and a
validation suite checks the quadrature moments against closed forms.
"""

from .grid import (
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
from .noise import (
    AlignmentError,
    NoiseCoefficient,
    TimeMesh,
    WienerPath,
    defect_moment_exact,
    heat_correction,
    micro_quadrature_defect,
    micro_riemann_sum,
    sample_path,
    wave_correction_displacement,
    wave_correction_velocity,
    wave_micro_sum_moment_exact,
)
from .heat import (
    ConfigError,
    HeatProblem,
    HeatState,
    benchmark_heat_problem,
    benchmark_phi,
    em_step,
    exact_heat_solution,
    mcn_heat_step,
    run_heat,
    stochastic_convolution,
)
from .wave import (
    WaveProblem,
    WaveState,
    benchmark_wave_problem,
    mcn_wave_step,
    reference_wave_solution,
    run_wave,
    wave_energy,
)
from .harness import (
    ConvergenceTable,
    StudyConfig,
    TableRow,
    csv_text,
    desk_heat_config,
    desk_wave_config,
    emit_csv,
    emit_report,
    fit_rate,
    paper_heat_config,
    paper_wave_config,
    read_csv,
    report_text,
    rms_and_standard_error,
    run_study,
    run_study_tables,
    validate_config,
)
from .validation import (
    CheckResult,
    ValidationReport,
    holder_trapezoid_bound,
    trapezoid_defect,
    validate_statistics,
)

__version__ = "0.1.0"
