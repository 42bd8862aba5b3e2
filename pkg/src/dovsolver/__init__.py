"""Direct operational-vector solver for nonlinear Volterra integral
equations of the first kind on Chebyshev and hybrid block-pulse/Chebyshev
bases."""

from .basis import (
    BasisSpec,
    CoeffVector,
    Interval,
    chebyshev_eval,
    eval_series,
    hcp_eval,
    project,
    weight,
)
from .expr import EvalError, ParseError, evaluate, parse, unparse
from .opalg import (
    HatVector,
    OpMatrix,
    hat_vector,
    integration_matrix,
    kernel_matrix,
    power_vector,
    product_matrix,
)
from .oracle import (
    Grid,
    max_error,
    quad_adaptive,
    residual_linf,
    uniform_grid,
    validate_integration_matrix,
    weighted_l2_error,
)
from .solver import (
    CollocationStrategy,
    Derivative,
    Diagnostics,
    General,
    Invertible,
    Polynomial,
    Problem,
    Solution,
    SolveOptions,
    SolverError,
    TaylorStrategy,
    assemble_linear_map,
    continuation_solve,
    newton_solve,
    scalar_invert,
    solve,
    solve_collocation_hybrid,
    solve_derivative,
    solve_invertible,
    solve_polynomial,
    solve_taylor,
)

__version__ = "0.1.0"
