"""Two-parameter Tikhonov regularization.

Thin wrapper over the compiled ``_mtikh`` extension.
"""

from ._mtikh import (
    DegenerateValue,
    Error,
    InvalidArgument,
    MissingTruth,
    PenaltyDegenerate,
    Problem,
    SelectionFailure,
    SelectionResult,
    SingularSystem,
    Solution,
    TraceEntry,
    default_model,
    make_test_problem,
    oracle_grid,
    relative_error,
    residual_bdp,
    select_broyden,
    select_fixed_point,
    solve,
    value_function,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
