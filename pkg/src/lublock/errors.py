"""Exception types shared across the package.

The CLI maps these onto process exit codes: parameter problems exit with 2,
numerical failures (ZeroPivot) with 1, and input/file problems with 3.
"""


class LuBlockError(Exception):
    """Base class for all package errors."""


# --- input / file errors -----------------------------------------------------

class MatrixFormatError(LuBlockError):
    """Base for Matrix Market ingestion problems."""


class NonSquare(MatrixFormatError):
    pass


class UnsupportedField(MatrixFormatError):
    pass


class MalformedEntry(MatrixFormatError):
    pass


class EmptyMatrix(MatrixFormatError):
    pass


class IndexOutOfRange(LuBlockError):
    pass


# --- parameter / shape errors -------------------------------------------------

class BadParams(LuBlockError):
    pass


class DimensionMismatch(LuBlockError):
    pass


class NotSymmetric(LuBlockError):
    pass


class MissingDiagonal(LuBlockError):
    pass


class DegenerateMatrix(LuBlockError):
    pass


class DegenerateCurve(LuBlockError):
    pass


# --- numerical errors ---------------------------------------------------------

class ZeroPivot(LuBlockError):
    """A diagonal block is numerically singular at the given pivot tolerance."""

    def __init__(self, block: int, col: int, message: str | None = None):
        self.block = block
        self.col = col
        super().__init__(
            message
            or f"zero pivot in diagonal block {block}, local column {col}"
        )


class SupportViolation(LuBlockError):
    """A Schur product produced a value outside the filled-pattern support.

    This indicates a symbolic-factorization bug and is fatal.
    """
