"""Diagonal block-based nonzero-distribution feature.

The diagonal block pointer counts, for every k, the nonzeros of the leading
k x k principal submatrix. For a symmetric full-diagonal pattern this is
obtained in one pass over the CSC arrays: count strictly-lower entries per
row, then accumulate 2*count+1 per index (lower + mirrored upper + the
diagonal entry). Normalizing index and value gives the percentage curve
whose shape exposes matrix structure: linear for banded, quadratic for
uniformly dense, jumps for dense rows/columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMatrix, BadParams
from .matrix_io import sample_positions
from .symbolic import FilledPattern, _require_symmetric_full_diag

CURVE_CLASSES = ("linear", "quadratic", "jumpy", "mixed")

DEFAULT_SAMPLE_POINTS = 1000


@dataclass
class DiagBlockPointer:
    """blockptr[k] = nnz of the leading k x k principal submatrix."""

    n: int
    blockptr: np.ndarray


@dataclass
class PercentCurve:
    """Normalized distribution curve: pct[k] in [0,1], pct[0]=0, pct[-1]=1."""

    n: int
    sample_points: int
    pct: np.ndarray


def diag_block_pointer(f: FilledPattern) -> DiagBlockPointer:
    """Extract the diagonal block pointer from a symmetric full-diagonal pattern."""
    n = f.n
    cols = f.entry_cols()
    _require_symmetric_full_diag(f.col_ptr, f.row_idx, n)
    below = f.row_idx > cols
    num = np.bincount(f.row_idx[below], minlength=n).astype(np.int64)
    num = 2 * num + 1
    blockptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(num, out=blockptr[1:])
    return DiagBlockPointer(n=n, blockptr=blockptr)


def percentage_curve(ptr: DiagBlockPointer, sample_points: int = DEFAULT_SAMPLE_POINTS) -> PercentCurve:
    """Sample the normalized pointer uniformly; sample_points is clamped to n."""
    if sample_points < 2:
        raise BadParams(f"sample_points must be >= 2, got {sample_points}")
    n = ptr.n
    total = int(ptr.blockptr[n])
    if total == 0:
        raise DegenerateMatrix("pattern has no nonzeros")
    sp_eff = min(sample_points, n)
    idx = sample_positions(n, sp_eff)
    pct = ptr.blockptr[idx] / total
    return PercentCurve(n=n, sample_points=sp_eff, pct=pct)


def classify_curve(curve: PercentCurve) -> str:
    """Classify curve shape: linear, quadratic, jumpy, or mixed.

    Linear/quadratic use a 0.02 max-deviation band against the reference
    shapes through the endpoints; the jump rule fires when a single-sample
    increment exceeds 10x the mean increment and takes precedence over mixed.
    """
    sp = curve.sample_points
    x = np.arange(sp + 1) / sp
    if np.max(np.abs(curve.pct - x)) < 0.02:
        return "linear"
    if np.max(np.abs(curve.pct - x * x)) < 0.02:
        return "quadratic"
    increments = np.diff(curve.pct)
    if np.any(increments > 10.0 / sp):
        return "jumpy"
    return "mixed"
