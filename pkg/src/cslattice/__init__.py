"""Maximal topological solutions of generalized Chern-Simons vortex equations
on lattice graphs Z^n: monotone iteration on Manhattan balls, domain
exhaustion, and numerical certification of decay and maximality."""

__version__ = "0.1.0"

from .errors import AnalysisError, ConfigError, ConvergenceError, SchemeIntegrityError
from .fields import (
    Field,
    grad_energy,
    grad_inner,
    integral,
    laplacian,
    norm,
    sum_by_parts_defect,
)
from .lattice import (
    LatticeDomain,
    Params,
    VortexConfig,
    assemble_source,
    build_domain,
    manhattan_distance,
    manhattan_norm,
    shell_size,
)
from .linear import (
    LinearSolveOptions,
    LinearSystem,
    dense_solve,
    linear_energy_eval,
    linear_solve,
    system_matrix,
)
from .scheme import (
    BoundedSolution,
    IterationTrace,
    TraceStep,
    boundary_flux,
    energy_eval,
    iterate_once,
    newton_solve,
    nonlinearity,
    nonlinearity_deriv,
    residual,
    solve_bounded,
)
from .exhaustion import (
    BarrierReport,
    CoercivityReport,
    DecayFit,
    ExhaustionResult,
    LpSummary,
    barrier_check,
    barrier_constant,
    coercivity_check,
    coercivity_default_grid,
    decay_fit,
    decay_rate_theory,
    lp_summary,
    run_exhaustion,
    shell_profile,
)

__all__ = [
    "AnalysisError",
    "BarrierReport",
    "BoundedSolution",
    "CoercivityReport",
    "ConfigError",
    "ConvergenceError",
    "DecayFit",
    "ExhaustionResult",
    "Field",
    "IterationTrace",
    "LatticeDomain",
    "LinearSolveOptions",
    "LinearSystem",
    "LpSummary",
    "Params",
    "SchemeIntegrityError",
    "TraceStep",
    "VortexConfig",
    "assemble_source",
    "barrier_check",
    "barrier_constant",
    "boundary_flux",
    "build_domain",
    "coercivity_check",
    "coercivity_default_grid",
    "decay_fit",
    "decay_rate_theory",
    "dense_solve",
    "energy_eval",
    "grad_energy",
    "grad_inner",
    "integral",
    "iterate_once",
    "laplacian",
    "linear_energy_eval",
    "linear_solve",
    "lp_summary",
    "manhattan_distance",
    "manhattan_norm",
    "newton_solve",
    "nonlinearity",
    "nonlinearity_deriv",
    "norm",
    "residual",
    "run_exhaustion",
    "shell_profile",
    "shell_size",
    "solve_bounded",
    "sum_by_parts_defect",
    "system_matrix",
]
