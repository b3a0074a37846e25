"""Structure-aware irregular blocking for sparse LU factorization.

Pipeline: ingest or synthesize a CSC matrix, symmetrize and symbolically
factor it, extract the diagonal-block distribution curve, derive a blocking
plan (irregular or regular), partition into a block grid with its task
dependency tree, then run the deterministic blocked numerical factorization
and the balance metrics.
"""

from .blocking import (
    BlockingPlan,
    PANGULU_SIZES,
    irregular_plan,
    pangulu_size_select,
    regular_plan,
)
from .errors import (
    BadParams,
    DegenerateCurve,
    DegenerateMatrix,
    DimensionMismatch,
    EmptyMatrix,
    IndexOutOfRange,
    LuBlockError,
    MalformedEntry,
    MissingDiagonal,
    NonSquare,
    NotSymmetric,
    SupportViolation,
    UnsupportedField,
    ZeroPivot,
)
from .factorize import (
    LUFactors,
    factor_diagonal,
    factor_l_panel,
    factor_u_panel,
    factorize,
    residual,
    schur_update,
    solve,
)
from .features import (
    DiagBlockPointer,
    PercentCurve,
    classify_curve,
    diag_block_pointer,
    percentage_curve,
)
from .grid import (
    BlockGrid,
    DependencyTree,
    GESSM,
    GETRF,
    SSSSM,
    SparseBlock,
    TSTRF,
    TaskView,
    dependency_levels,
    partition,
)
from .matrix_io import (
    CscMatrix,
    Triplet,
    csc_from_triplets,
    generate,
    read_matrix_market,
    write_curve_csv,
    write_plan_json,
    write_report_csv,
)
from .metrics import BalanceReport, block_nnz_stats, level_work_stats, makespan_model
from .symbolic import FilledPattern, fill_ratio, symbolic_factorize, symmetrize_pattern

__version__ = "0.1.0"

__all__ = [
    "BadParams",
    "BalanceReport",
    "BlockGrid",
    "BlockingPlan",
    "CscMatrix",
    "DegenerateCurve",
    "DegenerateMatrix",
    "DependencyTree",
    "DiagBlockPointer",
    "DimensionMismatch",
    "EmptyMatrix",
    "FilledPattern",
    "GESSM",
    "GETRF",
    "IndexOutOfRange",
    "LUFactors",
    "LuBlockError",
    "MalformedEntry",
    "MissingDiagonal",
    "NonSquare",
    "NotSymmetric",
    "PANGULU_SIZES",
    "PercentCurve",
    "SSSSM",
    "SparseBlock",
    "SupportViolation",
    "TSTRF",
    "TaskView",
    "Triplet",
    "UnsupportedField",
    "ZeroPivot",
    "block_nnz_stats",
    "classify_curve",
    "csc_from_triplets",
    "dependency_levels",
    "diag_block_pointer",
    "factor_diagonal",
    "factor_l_panel",
    "factor_u_panel",
    "factorize",
    "fill_ratio",
    "generate",
    "irregular_plan",
    "level_work_stats",
    "makespan_model",
    "pangulu_size_select",
    "partition",
    "percentage_curve",
    "read_matrix_market",
    "regular_plan",
    "residual",
    "schur_update",
    "solve",
    "symbolic_factorize",
    "symmetrize_pattern",
    "write_curve_csv",
    "write_plan_json",
    "write_report_csv",
]
