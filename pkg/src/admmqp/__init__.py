"""Dense splitting-based QP solver with convergence-rate certificates.

Solves  min q@y + 0.5 y@Q@y  s.t.  A@y = b,  lower <= y <= upper  by
alternating an equality-constrained quadratic step with a box projection,
bounds the observed per-iteration contraction with computable worst-case
factors, and detects infeasible instances together with a certificate of the
closest pair between the two constraint sets.
"""

from .builtins import make_builtin, nonstrict, qpex1, qpex2, qpex3, qpex3_variant
from .engine import (AdmmState, SolveOptions, SolveResult, Status, TraceRow,
                     admm_step, detect_infeasibility, dr_step, initial_state,
                     recover_equality_multipliers, solve, write_trace_csv)
from .infeasibility import (InfeasibilityCertificate, LimitReport, build_certificate,
                            infeasibility_minimizer, objective_shift, verify_limit)
from .operators import OperatorBundle, build_operators, null_range_basis, optimal_beta
from .oracle import OracleResult, oracle_solve
from .problem import (AssumptionViolation, Box, KktPoint, ProblemFormatError,
                      QpProblem, ValidationReport, kkt_residuals, load_problem,
                      load_problem_file, save_problem, validate)
from .prox import ProjectionResult, check_vi, project_box, reflect_box
from .rates import (RateContext, active_set_at, alpha_max, friedrichs_cos,
                    global_rate, per_iteration_bound, rate_table, worst_case_delta)

__version__ = "0.1.0"
