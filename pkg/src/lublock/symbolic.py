"""Symbolic factorization: the symmetric nonzero pattern of L+U.

The input pattern is symmetrized first; elimination then runs in natural
order 0..n-1. The fill pattern of L is computed row by row with the
elimination tree (each row's pattern is the set of tree nodes walked from
the row's below-diagonal neighbours up to the root of the traversal),
which is O(nnz(L)) overall. U is the transpose of L, and the stored
pattern is the union L+U with a full diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MissingDiagonal, NotSymmetric
from .matrix_io import CscMatrix, csc_from_triplets


@dataclass
class FilledPattern:
    """Structurally symmetric CSC pattern of L+U with a full diagonal."""

    n: int
    col_ptr: np.ndarray
    row_idx: np.ndarray

    @property
    def nnz_filled(self) -> int:
        return int(self.col_ptr[-1])

    def entry_cols(self) -> np.ndarray:
        return np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.col_ptr))


def symmetrize_pattern(a: CscMatrix) -> CscMatrix:
    """Pattern of A + A^T with full diagonal; added entries carry value 0.0."""
    cols = a.entry_cols()
    rows = np.concatenate([a.row_idx, cols, np.arange(a.n, dtype=np.int64)])
    ccols = np.concatenate([cols, a.row_idx, np.arange(a.n, dtype=np.int64)])
    vals = np.concatenate([a.values, np.zeros(a.nnz + a.n)])
    return csc_from_triplets(a.n, (rows, ccols, vals))


def _require_symmetric_full_diag(col_ptr, row_idx, n) -> None:
    cols = np.repeat(np.arange(n, dtype=np.int64), np.diff(col_ptr))
    diag_count = int(np.count_nonzero(row_idx == cols))
    if diag_count != n:
        raise MissingDiagonal(f"pattern has {diag_count} of {n} diagonal entries")
    key = cols * n + row_idx
    key_t = row_idx * n + cols
    if not np.array_equal(np.sort(key), np.sort(key_t)):
        raise NotSymmetric("pattern is not structurally symmetric")


def symbolic_factorize(a_sym: CscMatrix) -> FilledPattern:
    """Fill pattern of symmetric elimination in natural order.

    Expects the output of symmetrize_pattern (symmetric pattern, full
    diagonal); raises NotSymmetric / MissingDiagonal otherwise.
    """
    n = a_sym.n
    col_ptr = a_sym.col_ptr
    row_idx = a_sym.row_idx
    _require_symmetric_full_diag(col_ptr, row_idx, n)

    parent = np.full(n, -1, dtype=np.int64)
    mark = np.full(n, -1, dtype=np.int64)
    # flat buffer of strict-L row patterns: row i holds columns j < i of L
    cap = max(a_sym.nnz, 16)
    pat_cols = np.empty(cap, dtype=np.int64)
    pat_ptr = np.zeros(n + 1, dtype=np.int64)
    cur = 0
    for i in range(n):
        mark[i] = i
        lo, hi = col_ptr[i], col_ptr[i + 1]
        for r in row_idx[lo:hi]:
            # by symmetry, rows < i of column i are the columns < i of row i
            if r >= i:
                break
            j = r
            while mark[j] != i:
                if cur == cap:
                    cap *= 2
                    pat_cols = np.concatenate([pat_cols, np.empty(cap - cur, dtype=np.int64)])
                pat_cols[cur] = j
                cur += 1
                mark[j] = i
                if parent[j] == -1:
                    parent[j] = i
                j = parent[j]
        pat_ptr[i + 1] = cur
    pat_cols = pat_cols[:cur]

    # union pattern = strict L + strict U (= L^T) + diagonal, as triplets
    pat_rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(pat_ptr))
    diag = np.arange(n, dtype=np.int64)
    rows = np.concatenate([pat_rows, pat_cols, diag])
    cols = np.concatenate([pat_cols, pat_rows, diag])
    key = cols * n + rows
    order = np.argsort(key, kind="stable")
    rows = rows[order]
    cols = cols[order]
    out_ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(out_ptr, cols + 1, 1)
    out_ptr = np.cumsum(out_ptr)
    return FilledPattern(n=n, col_ptr=out_ptr, row_idx=rows)


def fill_ratio(a: CscMatrix, f: FilledPattern) -> float:
    """nnz(L+U) over nnz of the symmetrized input; >= 1 by construction."""
    if a.n != f.n:
        raise DimensionMismatch(f"order mismatch: {a.n} vs {f.n}")
    return f.nnz_filled / symmetrize_pattern(a).nnz
