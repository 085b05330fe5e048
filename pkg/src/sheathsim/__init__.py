"""Plasma sheath boundary-layer and quasineutral-limit toolkit.

Solvers for the half-line ion fluid with Boltzmann electrons: the coupled
system at finite Debye length, its quasineutral limit, wall-layer profile
construction, and the diagnostics used to measure convergence between them.
"""

from .config import RunConfig, load_config, parse_config
from .diagnostics import (ConvergenceStudy, ErrorRecord, RateFit,
                          discrete_norms, fit_rate, relative_entropy,
                          run_convergence_study)
from .errors import (ConfigError, NewtonError, SheathsimError, SolverError,
                     VacuumError)
from .euler_limit import (BoundaryMode, FluidState, LimitRun, boundary_trace,
                          run_limit, step_limit)
from .euler_poisson import (EnergyReport, FullRun, PlasmaParams,
                            PotentialField, energy_functional,
                            quasineutrality_residual, run_full, solve_poisson,
                            step_full)
from .expansion import (ExpansionBundle, EvaluatedFields, ResidualReport,
                        build_expansion, evaluate, evaluate_at, export_bundle,
                        residual)
from .grid import Grid1D
from .profiles import (CorrectorProblem, CorrectorSolution, SheathParams,
                       SheathProfile, hamiltonian, solve_leading_profile,
                       solve_linear_corrector, stable_manifold_slope)

__version__ = "0.1.0"

__all__ = [
    "BoundaryMode", "ConfigError", "ConvergenceStudy", "CorrectorProblem",
    "CorrectorSolution", "EnergyReport", "ErrorRecord", "EvaluatedFields",
    "ExpansionBundle", "FluidState", "FullRun", "Grid1D", "LimitRun",
    "NewtonError", "PlasmaParams", "PotentialField", "RateFit",
    "ResidualReport", "RunConfig", "SheathParams", "SheathProfile",
    "SheathsimError", "SolverError", "VacuumError", "boundary_trace",
    "build_expansion", "discrete_norms", "energy_functional", "evaluate",
    "evaluate_at", "export_bundle", "fit_rate", "hamiltonian", "load_config",
    "parse_config", "quasineutrality_residual", "relative_entropy",
    "residual", "run_convergence_study", "run_full", "run_limit",
    "solve_leading_profile", "solve_linear_corrector", "solve_poisson",
    "stable_manifold_slope", "step_full", "step_limit", "__version__",
]
