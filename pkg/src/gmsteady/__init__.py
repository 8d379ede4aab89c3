"""Steady states of the Gierer-Meinhardt activator-inhibitor system with
zero-flux boundary conditions: barriers, box solves and a multi-root search."""

from .barriers import (
    BarrierSet,
    BoxSpec,
    CertificateReport,
    ExponentConfig,
    build_barriers,
    calibrate_C_boundary,
    calibrate_C_interior,
    calibrate_constants,
    calibrate_delta,
    compute_y,
    compute_y_delta,
    compute_z,
    make_boxes,
    verify_subsuper,
)
from .errors import (
    CalibrationError,
    ConfigurationError,
    DomainError,
    EigensolverError,
    GMError,
    SolverError,
)
from .mesh import Grid, boundary_trace_max, boundary_trace_min, build_grid, c1_norm, dirichlet_operator, neumann_operator
from .multiroot import MultiRootResult, classify_boundary, find_three_solutions, pairwise_distance_matrix
from .solver import (
    HomotopyConfig,
    SearchRegions,
    SolutionPair,
    SolveReport,
    check_l9_nonexistence,
    check_p0_nonexistence,
    deflated_newton,
    gm_rhs,
    homotopy_solve,
    newton_refine,
    picard_solve_in_box,
    residual,
    truncate,
)
from .sparse_solve import Eigenpair, SparseOperator, cg_solve, rayleigh_quotient, smallest_eigenpair

__version__ = "0.1.0"
