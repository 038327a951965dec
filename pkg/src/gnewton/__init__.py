"""Gradient-regularized Newton methods with approximate Hessians."""

from gnewton.linalg import (
    GAMMA_MAX,
    FactorizationError,
    NormPair,
    PsdOperator,
    dual_norm,
    primal_norm,
    solve_rank_one_regularized,
    solve_regularized,
)
from gnewton.solver import (
    EmpiricalGamma,
    FixedGamma,
    FuncSearch,
    GradSearch,
    SolverConfig,
    StopRule,
    TheoreticalGamma,
    run,
)

__all__ = [
    "GAMMA_MAX",
    "FactorizationError",
    "NormPair",
    "PsdOperator",
    "dual_norm",
    "primal_norm",
    "solve_rank_one_regularized",
    "solve_regularized",
    "EmpiricalGamma",
    "FixedGamma",
    "FuncSearch",
    "GradSearch",
    "SolverConfig",
    "StopRule",
    "TheoreticalGamma",
    "run",
]
