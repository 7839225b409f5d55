"""Matrix-free geometric multigrid for the MAC-discretized 2D Stokes system.

Mass-based block relaxation (distributive, Braess-Sarazin, sigma-Uzawa, plus
diagonal-Jacobi baselines), a local Fourier analysis engine for smoothing
factors and parameter optimization, and a convergence-factor measurement
harness with two-grid, V- and W-cycles on periodic grids.
"""
from .grid import GridSpec, ShapeError, StaggeredField
from .lfa import (
    SmoothingResult,
    UzawaDiagnostics,
    eig3,
    fourier_mode,
    m_r_range,
    mode_coefficients,
    optimize_params,
    relaxation_symbol,
    smoothing_factor,
    stokes_symbol,
    uzawa_branches,
    uzawa_derived_params,
)
from .multigrid import (
    CycleKind,
    CycleSpec,
    DegenerateMeasurementError,
    DivergenceError,
    MeasureResult,
    build_hierarchy,
    cycle,
    measure_rho,
    prolong,
    restrict,
)
from .operators import (
    apply_divergence,
    apply_gradient,
    apply_mass,
    apply_pressure_laplacian,
    apply_stokes,
    residual,
)
from .relaxation import (
    PRESETS,
    RelaxParams,
    RelaxScheme,
    SchurSolveError,
    sweep,
    sweep_baseline,
    sweep_qbsr_exact,
    sweep_qdr,
    sweep_qibsr,
    sweep_quzawa,
)

__version__ = "0.1.0"

__all__ = [
    "GridSpec",
    "StaggeredField",
    "ShapeError",
    "apply_stokes",
    "apply_mass",
    "apply_pressure_laplacian",
    "apply_gradient",
    "apply_divergence",
    "residual",
    "RelaxScheme",
    "RelaxParams",
    "PRESETS",
    "SchurSolveError",
    "sweep",
    "sweep_qdr",
    "sweep_qbsr_exact",
    "sweep_qibsr",
    "sweep_quzawa",
    "sweep_baseline",
    "stokes_symbol",
    "relaxation_symbol",
    "smoothing_factor",
    "SmoothingResult",
    "optimize_params",
    "eig3",
    "m_r_range",
    "fourier_mode",
    "mode_coefficients",
    "uzawa_branches",
    "uzawa_derived_params",
    "UzawaDiagnostics",
    "CycleKind",
    "CycleSpec",
    "MeasureResult",
    "build_hierarchy",
    "restrict",
    "prolong",
    "cycle",
    "measure_rho",
    "DivergenceError",
    "DegenerateMeasurementError",
    "__version__",
]
