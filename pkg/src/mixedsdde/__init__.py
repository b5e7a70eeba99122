"""Mixed stochastic delay equations driven by a Wiener process and fractional Brownian motion."""

__version__ = "0.1.0"

from .grid import SamplePath, TimeGrid, read_path_csv, write_path_csv
from .norms import (
    NormConfig,
    NormReport,
    alpha_norm,
    holder_seminorm,
    one_norm_history,
    solution_norm,
    sup_norm_history,
)
from .paths import (
    FbmParams,
    InitialSegment,
    derivative_of_smoothed,
    generate_fbm,
    generate_wiener,
    smooth_driver,
    stop_driver,
    stopping_time_tau_N,
    substream,
)
from .integrals import (
    RegularityWarning,
    estimate_2_2_ratio,
    frac_derivative_left,
    frac_derivative_right,
    gls_integral,
    ito_integral,
    riemann_stieltjes_oracle,
)
from .solver import (
    CoefficientSet,
    LinearDelayODE,
    SddeProblem,
    SegmentView,
    SolutionPath,
    SolverError,
    euler_solve,
    method_of_steps_oracle,
    smoothed_solve,
    solution_distance,
)
from .coefficients import build_coefficients, validate_coefficients

__all__ = [name for name in dir() if not name.startswith("_")]
