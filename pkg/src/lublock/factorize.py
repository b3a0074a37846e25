"""Deterministic parallel right-looking blocked LU over a block grid.

Every block lives in a dense scratch array for the duration of the run
(scatter on entry, gather on exit); the four kernels are plain loop nests
over those arrays so the floating-point operation sequence is fixed by the
DAG alone. Updates into a common target are chained in ascending step
order, which makes the numbers bit-identical for any worker count.

Pivoting is confined to diagonal blocks. Row permutations are applied to
the block row's U panels before their solve; there is no pivoting across
blocks, so test matrices are expected to be diagonally dominant (or callers
opt into static pivot substitution).
"""

from __future__ import annotations

import math
import threading
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

from .blocking import BlockingPlan
from .errors import DimensionMismatch, SupportViolation, ZeroPivot
from .grid import GESSM, GETRF, SSSSM, TSTRF, BlockGrid, DependencyTree, SparseBlock
from .matrix_io import CscMatrix

DEFAULT_PIVOT_TOL = 1e-12


# --- block kernels (dense scratch; loop order fixed for determinism) ----------


def _getrf_inplace(d, pivot_tol, static_eps, block_index):
    """Partial-pivot LU of a square block, in place; returns (perm, is_identity).

    The pivot tolerance is relative to each column's max magnitude at entry.
    With static_eps set, a failed pivot is replaced instead of raising.
    """
    m = d.shape[0]
    perm = np.arange(m)
    identity = True
    colmax = np.abs(d).max(axis=0) if m else np.zeros(0)
    for k in range(m):
        col = np.abs(d[k:, k])
        pv = int(np.argmax(col))
        piv = col[pv]
        if piv == 0.0 or piv < pivot_tol * colmax[k]:
            if static_eps is None:
                raise ZeroPivot(block_index, k)
            cur = d[k, k]
            d[k, k] = static_eps if cur == 0.0 else math.copysign(static_eps, cur)
        elif pv != 0:
            kk = k + pv
            d[[k, kk], :] = d[[kk, k], :]
            perm[[k, kk]] = perm[[kk, k]]
            identity = False
        if k + 1 < m:
            d[k + 1 :, k] /= d[k, k]
            lcol = d[k + 1 :, k]
            urow = d[k, k + 1 :]
            rnz = np.flatnonzero(lcol)
            if len(rnz) == 0:
                continue
            cnz = np.flatnonzero(urow)
            if len(cnz) == 0:
                continue
            # restricting to structural nonzeros never changes the bits:
            # skipped terms are exact-zero products and targets are never -0
            if len(rnz) * len(cnz) * 2 >= len(lcol) * len(urow):
                d[k + 1 :, k + 1 :] -= np.outer(lcol, urow)
            else:
                d[np.ix_(k + 1 + rnz, k + 1 + cnz)] -= np.outer(lcol[rnz], urow[cnz])
    return perm, identity


def _getrf_blas(d, pivot_tol, block_index):
    """LAPACK-backed variant of _getrf_inplace (dense-kernel fallback)."""
    m = d.shape[0]
    colmax = np.abs(d).max(axis=0) if m else np.zeros(0)
    lu, piv = scipy.linalg.lu_factor(d, check_finite=False)
    diag = np.abs(np.diag(lu))
    bad = np.flatnonzero((diag == 0.0) | (diag < pivot_tol * colmax))
    if len(bad):
        raise ZeroPivot(block_index, int(bad[0]))
    d[:] = lu
    perm = np.arange(m)
    for k, pk in enumerate(piv):
        if pk != k:
            perm[[k, pk]] = perm[[pk, k]]
    return perm, bool(np.all(perm == np.arange(m)))


def _forward_unit_solve(lsrc, x):
    """x <- L^-1 x with L the strict lower of lsrc plus a unit diagonal."""
    m = lsrc.shape[0]
    for k in range(m - 1):
        col = lsrc[k + 1 :, k]
        nz = np.flatnonzero(col)
        if len(nz) == 0:
            continue
        if len(nz) * 2 >= len(col):
            x[k + 1 :] -= np.outer(col, x[k])
        else:
            x[k + 1 + nz] -= np.outer(col[nz], x[k])


def _right_upper_solve(x, usrc):
    """x <- x U^-1 with U the upper triangle (incl. diagonal) of usrc."""
    m = usrc.shape[1]
    for k in range(m):
        x[:, k] /= usrc[k, k]
        if k + 1 == m:
            break
        xk = x[:, k]
        nz = np.flatnonzero(xk)
        if len(nz) == 0:
            continue
        urow = usrc[k, k + 1 :]
        unz = np.flatnonzero(urow)
        if len(unz) == 0:
            continue
        if len(nz) * len(unz) * 2 >= len(xk) * len(urow):
            x[:, k + 1 :] -= np.outer(xk, urow)
        else:
            x[np.ix_(nz, k + 1 + unz)] -= np.outer(xk[nz], urow[unz])


def factor_diagonal(block, pivot_tol: float = DEFAULT_PIVOT_TOL,
                    static_pivot_value: float | None = None, block_index: int = 0):
    """Factor a square dense block: perm . block = L U.

    Returns (L, U, perm) with L unit lower triangular (explicit ones) and
    U upper triangular. Raises ZeroPivot when a pivot falls below
    pivot_tol times the column's entry magnitude.
    """
    d = np.array(block, dtype=np.float64, copy=True)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DimensionMismatch("diagonal block must be square")
    perm, _ = _getrf_inplace(d, pivot_tol, static_pivot_value, block_index)
    lower = np.tril(d, -1) + np.eye(d.shape[0])
    upper = np.triu(d)
    return lower, upper, perm


def factor_u_panel(l_ii, perm_i, b_ij):
    """U panel solve: L_ii^-1 applied to the row-permuted panel."""
    x = np.array(b_ij, dtype=np.float64, copy=True)
    if x.size:
        x = x[np.asarray(perm_i)]
        _forward_unit_solve(np.asarray(l_ii), x)
    return x


def factor_l_panel(b_ji, u_ii):
    """L panel solve: panel times U_ii^-1 via back substitution per row."""
    x = np.array(b_ji, dtype=np.float64, copy=True)
    u = np.asarray(u_ii)
    if x.size:
        diag = np.abs(np.diag(u))
        if np.any(diag == 0.0):
            raise ZeroPivot(0, int(np.argmin(diag)))
        _right_upper_solve(x, u)
    return x


def schur_update(b_kj, l_ki, u_ij):
    """Trailing update: b_kj - l_ki @ u_ij."""
    return np.asarray(b_kj, dtype=np.float64) - np.asarray(l_ki) @ np.asarray(u_ij)


# --- factor container ----------------------------------------------------------


def _block_from_dense(d) -> SparseBlock:
    """Re-sparsify a dense scratch block, dropping exact zeros."""
    ct = np.ascontiguousarray(d.T)
    cols, rows = np.nonzero(ct)
    col_ptr = np.zeros(d.shape[1] + 1, dtype=np.int64)
    np.add.at(col_ptr, cols + 1, 1)
    np.cumsum(col_ptr, out=col_ptr)
    return SparseBlock(
        nrows=d.shape[0],
        ncols=d.shape[1],
        col_ptr=col_ptr,
        row_idx=rows.astype(np.int64),
        values=ct[cols, rows],
    )


@dataclass
class LUFactors:
    """Blocked factors: P_block . A_filled = L U.

    l_blocks holds (i, j) with j <= i (diagonal blocks unit lower with
    explicit ones); u_blocks holds (i, j) with j >= i. perms[i] is block
    row i's local row permutation.
    """

    n: int
    plan: BlockingPlan
    l_blocks: dict
    u_blocks: dict
    perms: list
    _assembled: dict = field(default_factory=dict, repr=False)

    def perm_global(self) -> np.ndarray:
        if "perm" not in self._assembled:
            offs = self.plan.positions
            parts = [offs[i] + self.perms[i] for i in range(self.plan.p)]
            self._assembled["perm"] = np.concatenate(parts)
        return self._assembled["perm"]

    def _assemble(self, blocks) -> sp.csr_matrix:
        offs = self.plan.positions
        rows, cols, vals = [], [], []
        for (bi, bj), blk in blocks.items():
            local_cols = np.repeat(np.arange(blk.ncols), blk.col_counts)
            rows.append(blk.row_idx + offs[bi])
            cols.append(local_cols + offs[bj])
            vals.append(blk.values)
        rows = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
        cols = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
        vals = np.concatenate(vals) if vals else np.empty(0)
        return sp.coo_matrix((vals, (rows, cols)), shape=(self.n, self.n)).tocsr()

    def l_matrix(self) -> sp.csr_matrix:
        if "L" not in self._assembled:
            self._assembled["L"] = self._assemble(self.l_blocks)
        return self._assembled["L"]

    def u_matrix(self) -> sp.csr_matrix:
        if "U" not in self._assembled:
            self._assembled["U"] = self._assemble(self.u_blocks)
        return self._assembled["U"]


# --- driver --------------------------------------------------------------------


def factorize(
    grid: BlockGrid,
    tree: DependencyTree,
    workers: int = 1,
    pivot_tol: float = DEFAULT_PIVOT_TOL,
    static_pivot: float | None = None,
    dense_blas: bool = False,
) -> LUFactors:
    """Run the blocked factorization over the dependency tree.

    Output values are bit-identical for every workers >= 1: the DAG (panel
    and diagonal dependencies plus the ascending-step update chain per
    target block) fully orders every read/write pair, so scheduling freedom
    never reaches the floating point. dense_blas switches diagonal/panel
    kernels to LAPACK/BLAS for blocks at least half full; determinism then
    holds only for a fixed flag value.
    """
    if workers < 1:
        raise DimensionMismatch(f"workers must be >= 1, got {workers}")
    p = grid.p
    state = {key: blk.to_dense() for key, blk in grid.blocks.items()}
    perms: list = [None] * p
    static_eps = None
    if static_pivot is not None:
        static_eps = float(static_pivot) * (grid.value_max or 1.0)

    dense_keys = frozenset(
        key
        for key, blk in grid.blocks.items()
        if dense_blas and blk.nnz * 2 >= blk.nrows * blk.ncols
    )

    # Support checks detect symbolic bugs: products must stay inside the
    # filled support. Block-local pivoting legitimately moves support, so
    # the checks retire after the first non-identity permutation.
    checks = {"active": True}
    outside_cache: dict = {}

    def outside_of(key):
        if key in outside_cache:
            return outside_cache[key]
        blk = grid.blocks[key]
        size = blk.nrows * blk.ncols
        if blk.nnz == size:
            out = None
        else:
            mask = np.ones(size, dtype=bool)
            mask[blk.support_flat()] = False
            out = np.flatnonzero(mask)
        outside_cache[key] = out
        return out

    kinds = tree.kinds
    steps = tree.steps
    rows = tree.rows
    cols = tree.cols

    def run_task(t: int):
        kind = kinds[t]
        i = steps[t]
        r = rows[t]
        c = cols[t]
        if kind == SSSSM:
            lw = state[(r, i)]
            up = state[(i, c)]
            prod = lw @ up
            tgt = state.get((r, c))
            if tgt is None:
                if prod.any():
                    raise SupportViolation(
                        f"update from step {i} hits empty block ({r}, {c})"
                    )
                return
            if checks["active"]:
                out = outside_of((r, c))
                if out is not None and prod.ravel()[out].any():
                    raise SupportViolation(
                        f"update from step {i} writes outside filled support "
                        f"of block ({r}, {c})"
                    )
            tgt -= prod
        elif kind == GESSM:
            x = state[(i, c)]
            perm = perms[i]
            if perm is not None:
                x[:] = x[perm]
            if (i, i) in dense_keys:
                x[:] = scipy.linalg.solve_triangular(
                    state[(i, i)], x, lower=True, unit_diagonal=True,
                    check_finite=False,
                )
            else:
                _forward_unit_solve(state[(i, i)], x)
        elif kind == TSTRF:
            x = state[(r, i)]
            if (i, i) in dense_keys:
                x[:] = scipy.linalg.solve_triangular(
                    state[(i, i)], x.T, trans="T", lower=False, check_finite=False
                ).T
            else:
                _right_upper_solve(x, state[(i, i)])
        else:  # GETRF
            d = state[(i, i)]
            if (i, i) in dense_keys and static_eps is None:
                perm, identity = _getrf_blas(d, pivot_tol, i)
            else:
                perm, identity = _getrf_inplace(d, pivot_tol, static_eps, i)
            perms[i] = None if identity else perm
            if not identity:
                checks["active"] = False

    nt = tree.task_count
    if workers == 1:
        # construction order is topological; run it directly
        for t in range(nt):
            run_task(t)
    else:
        _run_pool(tree, run_task, workers)

    for i in range(p):
        if perms[i] is None:
            perms[i] = np.arange(
                int(grid.plan.positions[i + 1] - grid.plan.positions[i])
            )

    l_blocks = {}
    u_blocks = {}
    for (bi, bj), d in state.items():
        if bi > bj:
            l_blocks[(bi, bj)] = _block_from_dense(d)
        elif bi < bj:
            u_blocks[(bi, bj)] = _block_from_dense(d)
        else:
            l_blocks[(bi, bi)] = _block_from_dense(
                np.tril(d, -1) + np.eye(d.shape[0])
            )
            u_blocks[(bi, bi)] = _block_from_dense(np.triu(d))
    return LUFactors(
        n=grid.n, plan=grid.plan, l_blocks=l_blocks, u_blocks=u_blocks, perms=perms
    )


def _run_pool(tree: DependencyTree, run_task, workers: int) -> None:
    """Fixed-size worker pool over the ready queue of the task DAG."""
    nt = tree.task_count
    succ_ptr, succ_idx = tree.successors()
    indeg = np.diff(tree.pred_ptr).astype(np.int64)
    ready = deque(np.flatnonzero(indeg == 0).tolist())
    cond = threading.Condition()
    done = 0
    stop = False
    error: list = []

    def worker():
        nonlocal done, stop
        while True:
            with cond:
                while not ready and not stop and done < nt:
                    cond.wait()
                if stop or (done >= nt and not ready):
                    return
                t = ready.popleft()
            try:
                run_task(t)
            except BaseException as exc:  # propagate the first failure
                with cond:
                    if not error:
                        error.append(exc)
                    stop = True
                    cond.notify_all()
                return
            with cond:
                done += 1
                for s in succ_idx[succ_ptr[t] : succ_ptr[t + 1]]:
                    indeg[s] -= 1
                    if indeg[s] == 0:
                        ready.append(int(s))
                cond.notify_all()

    threads = [threading.Thread(target=worker) for _ in range(workers)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    if error:
        raise error[0]
    if done != nt:
        raise RuntimeError(f"scheduler stalled: {done} of {nt} tasks ran")


# --- validation ----------------------------------------------------------------


def residual(a: CscMatrix, f: LUFactors) -> float:
    """Relative factorization residual ||P A - L U||_F / ||A||_F, sparse."""
    if a.n != f.n:
        raise DimensionMismatch(f"order mismatch: {a.n} vs {f.n}")
    pa = a.to_scipy().tocsr()[f.perm_global(), :]
    diff = (pa - f.l_matrix() @ f.u_matrix()).tocoo()
    num = math.sqrt(float(np.sum(diff.data * diff.data)))
    den = math.sqrt(float(np.sum(a.values * a.values)))
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def solve(f: LUFactors, b) -> np.ndarray:
    """Solve A x = b using the blocked factors (forward then back substitution)."""
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (f.n,):
        raise DimensionMismatch(f"rhs must have length {f.n}")
    y = spsolve_triangular(f.l_matrix(), b[f.perm_global()], lower=True)
    return spsolve_triangular(f.u_matrix(), y, lower=False)
