"""Matrix ingestion, synthesis, and artifact serialization.

Matrices are square, real, double precision, and stored in compressed
sparse column (CSC) form. Explicit zeros are kept: downstream symbolic
analysis is pattern-driven, so the pattern (not the value) decides what
an entry is.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import (
    BadParams,
    EmptyMatrix,
    IndexOutOfRange,
    MalformedEntry,
    NonSquare,
    UnsupportedField,
)

GENERATOR_KINDS = ("tridiagonal", "dense", "arrowhead", "random_spd")


class Triplet(NamedTuple):
    row: int
    col: int
    value: float


@dataclass
class CscMatrix:
    """Square sparse matrix in compressed sparse column form.

    col_ptr has n+1 non-decreasing offsets into row_idx/values, row indices
    are 0-based and strictly increasing within each column.
    """

    n: int
    col_ptr: np.ndarray
    row_idx: np.ndarray
    values: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.col_ptr[-1])

    def check(self) -> "CscMatrix":
        """Validate the CSC invariants; returns self so builders can chain."""
        if self.n < 1:
            raise EmptyMatrix(f"matrix order must be >= 1, got {self.n}")
        if len(self.col_ptr) != self.n + 1 or self.col_ptr[0] != 0:
            raise BadParams("col_ptr must have n+1 entries starting at 0")
        if np.any(np.diff(self.col_ptr) < 0):
            raise BadParams("col_ptr must be non-decreasing")
        if self.col_ptr[-1] != len(self.row_idx) or len(self.row_idx) != len(self.values):
            raise BadParams("col_ptr[n] must equal len(row_idx) == len(values)")
        if self.nnz:
            if self.row_idx.min() < 0 or self.row_idx.max() >= self.n:
                raise IndexOutOfRange("row index outside [0, n)")
            # strictly increasing rows within each column
            d = np.diff(self.row_idx)
            col_starts = self.col_ptr[1:-1]
            inside = np.ones(len(d), dtype=bool)
            inside[col_starts - 1] = False  # breaks at column boundaries are fine
            if np.any(d[inside] <= 0):
                raise BadParams("row indices must be strictly increasing per column")
        return self

    def to_triplets(self) -> list[Triplet]:
        cols = np.repeat(np.arange(self.n), np.diff(self.col_ptr))
        return [
            Triplet(int(r), int(c), float(v))
            for r, c, v in zip(self.row_idx, cols, self.values)
        ]

    def to_scipy(self) -> sp.csc_matrix:
        return sp.csc_matrix(
            (self.values, self.row_idx, self.col_ptr), shape=(self.n, self.n)
        )

    def entry_cols(self) -> np.ndarray:
        """Column index of every stored entry, in storage order."""
        return np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.col_ptr))

    def pattern_equal(self, other: "CscMatrix") -> bool:
        return (
            self.n == other.n
            and np.array_equal(self.col_ptr, other.col_ptr)
            and np.array_equal(self.row_idx, other.row_idx)
        )


def csc_from_triplets(n: int, entries) -> CscMatrix:
    """Assemble sorted, duplicate-summed CSC from (row, col, value) entries.

    Duplicates are summed; a sum of exactly zero stays stored (explicit zeros
    are pattern members).
    """
    if n < 1:
        raise EmptyMatrix(f"matrix order must be >= 1, got {n}")
    if (
        isinstance(entries, tuple)
        and len(entries) == 3
        and isinstance(entries[0], np.ndarray)
    ):
        rows, cols, vals = (np.asarray(a) for a in entries)
        rows = rows.astype(np.int64)
        cols = cols.astype(np.int64)
        vals = vals.astype(np.float64)
    else:
        entries = list(entries)
        if len(entries) == 0:
            rows = np.empty(0, dtype=np.int64)
            cols = np.empty(0, dtype=np.int64)
            vals = np.empty(0, dtype=np.float64)
        else:
            arr = np.asarray(entries, dtype=np.float64)
            rows = arr[:, 0].astype(np.int64)
            cols = arr[:, 1].astype(np.int64)
            vals = arr[:, 2].astype(np.float64)
    if len(rows) and (
        rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= n
    ):
        raise IndexOutOfRange("triplet index outside [0, n)")
    # coo -> csc sums duplicates and sorts indices but drops nothing
    m = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsc()
    m.sort_indices()
    return CscMatrix(
        n=n,
        col_ptr=m.indptr.astype(np.int64),
        row_idx=m.indices.astype(np.int64),
        values=m.data.astype(np.float64),
    ).check()


def _parse_header(line: str, path) -> tuple[str, str]:
    tokens = line.strip().lower().split()
    if len(tokens) < 5 or tokens[0] != "%%matrixmarket" or tokens[1] != "matrix":
        raise MalformedEntry(f"{path}: not a Matrix Market coordinate file")
    fmt, fld, sym = tokens[2], tokens[3], tokens[4]
    if fmt != "coordinate":
        raise UnsupportedField(f"{path}: only coordinate format is supported")
    if fld not in ("real", "integer", "pattern"):
        raise UnsupportedField(f"{path}: unsupported field '{fld}'")
    if sym not in ("general", "symmetric"):
        raise UnsupportedField(f"{path}: unsupported symmetry '{sym}'")
    return fld, sym


def read_matrix_market(path) -> CscMatrix:
    """Read a coordinate Matrix Market file into CSC form.

    Symmetric storage is expanded eagerly, duplicates are summed, pattern
    entries get value 1.0, and 1-based indices become 0-based.
    """
    with open(path, "r") as fh:
        header = fh.readline()
        fld, sym = _parse_header(header, path)
        size_line = None
        for line in fh:
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            size_line = stripped
            break
        if size_line is None:
            raise MalformedEntry(f"{path}: missing size line")
        parts = size_line.split()
        if len(parts) != 3:
            raise MalformedEntry(f"{path}: bad size line '{size_line}'")
        try:
            nrows, ncols, nnz_decl = (int(p) for p in parts)
        except ValueError as exc:
            raise MalformedEntry(f"{path}: bad size line '{size_line}'") from exc
        if nrows != ncols:
            raise NonSquare(f"{path}: {nrows} rows != {ncols} cols")
        if nrows == 0:
            raise EmptyMatrix(f"{path}: empty matrix")

        want = 2 if fld == "pattern" else 3
        rows = np.empty(nnz_decl, dtype=np.int64)
        cols = np.empty(nnz_decl, dtype=np.int64)
        vals = np.empty(nnz_decl, dtype=np.float64)
        k = 0
        for line in fh:
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            parts = stripped.split()
            if len(parts) != want:
                raise MalformedEntry(f"{path}: expected {want} tokens, got '{stripped}'")
            try:
                r = int(parts[0]) - 1
                c = int(parts[1]) - 1
                v = 1.0 if fld == "pattern" else float(parts[2])
            except ValueError as exc:
                raise MalformedEntry(f"{path}: bad entry '{stripped}'") from exc
            if not (0 <= r < nrows and 0 <= c < ncols):
                raise MalformedEntry(f"{path}: index out of range in '{stripped}'")
            if k >= nnz_decl:
                raise MalformedEntry(f"{path}: more entries than declared ({nnz_decl})")
            rows[k], cols[k], vals[k] = r, c, v
            k += 1
        if k != nnz_decl:
            raise MalformedEntry(f"{path}: declared {nnz_decl} entries, found {k}")

    if sym == "symmetric":
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    m = sp.coo_matrix((vals, (rows, cols)), shape=(nrows, nrows)).tocsc()
    m.sort_indices()
    return CscMatrix(
        n=nrows,
        col_ptr=m.indptr.astype(np.int64),
        row_idx=m.indices.astype(np.int64),
        values=m.data.astype(np.float64),
    ).check()


# --- generators ---------------------------------------------------------------


def _dominant_diagonal(rows, cols, vals, n, rng) -> np.ndarray:
    """Diagonal values making each row strictly dominant over its off-diagonals."""
    off = rows != cols
    rowsum = np.bincount(rows[off], weights=np.abs(vals[off]), minlength=n)
    return rowsum + rng.uniform(0.5, 1.5, n)


def generate(kind: str, n: int, *, seed: int = 0, b: int | None = None,
             bandwidth: int | None = None, density: float = 0.3) -> CscMatrix:
    """Synthesize a deterministic diagonally dominant test matrix.

    kind is one of 'tridiagonal', 'dense', 'arrowhead' (diagonal body plus
    dense last-b rows and columns), or 'random_spd' (symmetric banded random).
    Output is bit-reproducible for a fixed (kind, n, params, seed).
    """
    if n < 1:
        raise BadParams(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)

    if kind == "tridiagonal":
        sub = rng.uniform(0.2, 1.0, n - 1) * rng.choice([-1.0, 1.0], n - 1)
        sup = rng.uniform(0.2, 1.0, n - 1) * rng.choice([-1.0, 1.0], n - 1)
        rows = np.concatenate([np.arange(1, n), np.arange(0, n - 1), np.arange(n)])
        cols = np.concatenate([np.arange(0, n - 1), np.arange(1, n), np.arange(n)])
        vals = np.concatenate([sub, sup, np.zeros(n)])
        vals[-n:] = _dominant_diagonal(rows, cols, vals, n, rng)
    elif kind == "dense":
        full = rng.uniform(-1.0, 1.0, (n, n))
        rows, cols = np.indices((n, n))
        rows, cols, vals = rows.ravel(), cols.ravel(), full.ravel()
        diag = rows == cols
        vals[diag] = 0.0
        vals[diag] = _dominant_diagonal(rows, cols, vals, n, rng)
    elif kind == "arrowhead":
        if b is None or not (1 <= b < n):
            raise BadParams(f"arrowhead needs border width 1 <= b < n, got {b}")
        body = n - b
        # diagonal body, dense last-b rows and columns (corner included)
        br = np.repeat(np.arange(body, n), body)
        bc = np.tile(np.arange(body), b)
        cr = np.repeat(np.arange(body, n), b)
        cc = np.tile(np.arange(body, n), b)
        rows = np.concatenate([np.arange(body), br, bc, cr])
        cols = np.concatenate([np.arange(body), bc, br, cc])
        vals = np.concatenate(
            [np.zeros(body), rng.uniform(-1.0, 1.0, 2 * b * body + b * b)]
        )
        diag = rows == cols
        vals[diag] = 0.0
        vals[diag] = _dominant_diagonal(rows, cols, vals, n, rng)
    elif kind == "random_spd":
        w = bandwidth if bandwidth is not None else min(n - 1, 8)
        if w < 0 or not (0.0 < density <= 1.0):
            raise BadParams("random_spd needs bandwidth >= 0 and density in (0,1]")
        li, lj = [], []
        for off in range(1, w + 1):
            i = np.arange(off, n)
            keep = rng.random(len(i)) < density
            li.append(i[keep])
            lj.append(i[keep] - off)
        li = np.concatenate(li) if li else np.empty(0, dtype=np.int64)
        lj = np.concatenate(lj) if lj else np.empty(0, dtype=np.int64)
        lv = rng.uniform(-1.0, 1.0, len(li))
        rows = np.concatenate([li, lj, np.arange(n)])
        cols = np.concatenate([lj, li, np.arange(n)])
        vals = np.concatenate([lv, lv, np.zeros(n)])
        vals[-n:] = _dominant_diagonal(rows, cols, vals, n, rng)
    else:
        raise BadParams(f"unknown generator kind '{kind}'")

    return csc_from_triplets(n, (rows, cols, vals))


# --- writers ------------------------------------------------------------------


def sample_positions(n: int, sample_points: int) -> np.ndarray:
    """Matrix indices of the uniform curve samples (round half-up, endpoints pinned)."""
    k = np.arange(sample_points + 1, dtype=np.int64)
    return (2 * k * n + sample_points) // (2 * sample_points)


def write_curve_csv(curve, path) -> None:
    """Write `index,fraction` rows; index is the sampled matrix row/col index."""
    idx = sample_positions(curve.n, curve.sample_points)
    with open(path, "w") as fh:
        fh.write("index,fraction\n")
        for i, frac in zip(idx, curve.pct):
            fh.write(f"{int(i)},{float(frac)!r}\n")


def write_plan_json(plan, path) -> None:
    payload = {
        "n": int(plan.n),
        "strategy": plan.strategy,
        "params": plan.params,
        "positions": [int(p) for p in plan.positions],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def write_report_csv(rows, path, *, header) -> None:
    """Write a header row then comma-joined rows; floats use repr for fidelity."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)
