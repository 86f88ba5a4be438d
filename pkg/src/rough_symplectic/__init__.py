"""Symplectic integration of Hamiltonian systems driven by fractional
Brownian motion.

The package provides exact fBm sampling (`paths`), two built-in Hamiltonian
systems with closed-form reference solutions (`systems`), symplectic
Runge-Kutta tableaus (`tableaus`), implicit and simplified-Euler integrators
with optional Jacobian propagation (`integrators`), convergence / area /
invariant experiments (`experiments`), and a reproducible CSV-emitting CLI
(`cli`). Hot loops are compiled with numba when available; set
``ROUGH_SYMPLECTIC_JIT=0`` to force the pure-numpy fallback (identical
results, only speed differs).
"""

from .experiments import (
    AreaSeries,
    ConvergenceConfig,
    ConvergenceReport,
    PathResult,
    SchemeReport,
    area_evolution,
    convergence_experiment,
    fit_slope,
    invariant_drift,
    shoelace_area,
    square_boundary,
    zero_noise_path,
)
from .integrators import (
    SCHEME_NAMES,
    LinearMidpoint,
    NonConvergence,
    RungeKutta,
    SimplifiedEuler,
    SolverConfig,
    Trajectory,
    integrate,
    midpoint_step_linear,
    rk_step,
    scheme_from_name,
    simplified_euler_step,
    solve_stages,
)
from .kernels import JIT_ENABLED, NUMBA_AVAILABLE
from .paths import (
    CovarianceFactorizationError,
    FbmConfig,
    SamplePath,
    coarsen,
    fgn_covariance,
    sample_fbm,
)
from .systems import (
    SYSTEM_NAMES,
    KuboParams,
    SystemSpec,
    kubo_system,
    system_from_name,
    trig_system,
)
from .tableaus import (
    BUILTIN_TABLEAU_NAMES,
    ButcherTableau,
    builtin_tableau,
    is_symplectic,
    method2_coefficient,
    symplectic_residual,
)

__version__ = "1.0.0"

__all__ = [
    "AreaSeries",
    "BUILTIN_TABLEAU_NAMES",
    "ButcherTableau",
    "ConvergenceConfig",
    "ConvergenceReport",
    "CovarianceFactorizationError",
    "FbmConfig",
    "JIT_ENABLED",
    "KuboParams",
    "LinearMidpoint",
    "NUMBA_AVAILABLE",
    "NonConvergence",
    "PathResult",
    "RungeKutta",
    "SCHEME_NAMES",
    "SYSTEM_NAMES",
    "SamplePath",
    "SchemeReport",
    "SimplifiedEuler",
    "SolverConfig",
    "SystemSpec",
    "Trajectory",
    "area_evolution",
    "builtin_tableau",
    "coarsen",
    "convergence_experiment",
    "fgn_covariance",
    "fit_slope",
    "integrate",
    "invariant_drift",
    "is_symplectic",
    "kubo_system",
    "method2_coefficient",
    "midpoint_step_linear",
    "rk_step",
    "sample_fbm",
    "scheme_from_name",
    "shoelace_area",
    "simplified_euler_step",
    "solve_stages",
    "square_boundary",
    "system_from_name",
    "trig_system",
    "zero_noise_path",
    "__version__",
]
