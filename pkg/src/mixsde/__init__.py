"""Pathwise fractional calculus, mollification and mixed SDE solvers on uniform grids."""

from .fracint import frac_deriv_left, frac_deriv_right, gls_integral, pathwise_bound, young_sum
from .grid import ConfigError, FactorizationError, GridPath, SolverOverflowError, read_csv, write_csv
from .holder import (HolderParams, estimate_holder_exponent, norm_2alpha, norm_alpha, norm_infalpha,
                     seminorm_0alpha)
from .mixed_solver import (CoefficientSet, SolveConfig, TruncationLevel, euler_solve_mixed,
                           geometric_solution, solve_smooth_driver, stop_process, tau_N,
                           validate_coefficients)
from .mollify import MollifyConfig, build_sequence, mollify, mollify_rate
from .process_gen import GenConfig, gen_fbm, gen_wiener, holder_constant

__version__ = "0.1.0"
