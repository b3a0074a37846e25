"""2D block grid over the filled pattern and the task dependency tree.

Only blocks with filled-pattern support are stored; because the filled
pattern is closed under elimination, every Schur-update target already has
support, so the task DAG is static. Levels are assigned earliest-consistent
(ASAP) over the real dependencies, including the ascending-step chain that
orders updates into a common target block (the chain is what makes the
numerical phase order-independent, so it belongs in the DAG).
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .blocking import BlockingPlan
from .errors import DimensionMismatch
from .matrix_io import CscMatrix
from .symbolic import FilledPattern

GETRF, GESSM, TSTRF, SSSSM = 0, 1, 2, 3
KIND_NAMES = ("GETRF", "GESSM", "TSTRF", "SSSSM")


@dataclass
class SparseBlock:
    """CSC submatrix with local indices; possibly rectangular."""

    nrows: int
    ncols: int
    col_ptr: np.ndarray
    row_idx: np.ndarray
    values: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.col_ptr[-1])

    @property
    def col_counts(self) -> np.ndarray:
        return np.diff(self.col_ptr)

    @property
    def row_counts(self) -> np.ndarray:
        return np.bincount(self.row_idx, minlength=self.nrows)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols))
        cols = np.repeat(np.arange(self.ncols), self.col_counts)
        out[self.row_idx, cols] = self.values
        return out

    def support_flat(self) -> np.ndarray:
        """Flat (row-major) indices of the stored support."""
        cols = np.repeat(np.arange(self.ncols), self.col_counts)
        return self.row_idx * self.ncols + cols


@dataclass
class BlockGrid:
    """Sparse map of nonempty blocks plus per-block nnz counts."""

    n: int
    p: int
    plan: BlockingPlan
    blocks: dict
    block_nnz: np.ndarray
    nnz_filled: int
    value_max: float

    def lower_blocks(self, i: int) -> np.ndarray:
        """Block rows k > i with a stored block in column i."""
        col = self.block_nnz[i + 1 :, i]
        return i + 1 + np.flatnonzero(col)

    def upper_blocks(self, i: int) -> np.ndarray:
        """Block cols j > i with a stored block in row i."""
        row = self.block_nnz[i, i + 1 :]
        return i + 1 + np.flatnonzero(row)


def partition(f: FilledPattern, a: CscMatrix, plan: BlockingPlan) -> BlockGrid:
    """Split the filled pattern into blocks, scattering values from a.

    Fill positions carry 0.0; every stored block keeps CSC order with local
    indices. Blocks with no filled support are omitted.
    """
    n = f.n
    if not (plan.n == n == a.n):
        raise DimensionMismatch(
            f"plan n={plan.n}, pattern n={f.n}, matrix n={a.n} must agree"
        )
    frows = f.row_idx
    fcols = f.entry_cols()
    fkey = fcols * n + frows
    akey = a.entry_cols() * n + a.row_idx
    pos = np.searchsorted(fkey, akey)
    if len(akey) and (pos.max() >= len(fkey) or np.any(fkey[pos] != akey)):
        raise DimensionMismatch("filled pattern does not cover the input pattern")
    vals = np.zeros(len(fkey))
    vals[pos] = a.values

    positions = plan.positions
    p = plan.p
    brow = np.searchsorted(positions, frows, side="right") - 1
    bcol = np.searchsorted(positions, fcols, side="right") - 1
    bkey = bcol * p + brow
    order = np.argsort(bkey, kind="stable")
    sorted_key = bkey[order]
    cuts = np.flatnonzero(np.diff(sorted_key)) + 1
    starts = np.concatenate([[0], cuts])
    ends = np.concatenate([cuts, [len(fkey)]])

    blocks = {}
    block_nnz = np.zeros((p, p), dtype=np.int64)
    for s, e in zip(starts, ends):
        key = int(sorted_key[s])
        bj, bi = divmod(key, p)
        sel = order[s:e]
        nrows = int(positions[bi + 1] - positions[bi])
        ncols = int(positions[bj + 1] - positions[bj])
        local_rows = frows[sel] - positions[bi]
        local_cols = fcols[sel] - positions[bj]
        col_ptr = np.zeros(ncols + 1, dtype=np.int64)
        np.add.at(col_ptr, local_cols + 1, 1)
        np.cumsum(col_ptr, out=col_ptr)
        blocks[(bi, bj)] = SparseBlock(
            nrows=nrows,
            ncols=ncols,
            col_ptr=col_ptr,
            row_idx=local_rows,
            values=vals[sel],
        )
        block_nnz[bi, bj] = e - s

    value_max = float(np.max(np.abs(a.values))) if a.nnz else 0.0
    return BlockGrid(
        n=n,
        p=p,
        plan=plan,
        blocks=blocks,
        block_nnz=block_nnz,
        nnz_filled=f.nnz_filled,
        value_max=value_max,
    )


class TaskView(NamedTuple):
    kind: int
    step: int
    row: int
    col: int
    weight: int
    cost: int
    level: int


@dataclass
class DependencyTree:
    """Level-ordered task DAG of blocked right-looking LU.

    Parallel arrays describe one task per index: kind (GETRF/GESSM/TSTRF/
    SSSSM), elimination step, target block (row, col), weight (nnz-based,
    min of input nnz for updates), cost (structural multiply-add count for
    updates, block nnz otherwise), and ASAP level. pred_ptr/pred_idx is a
    CSR adjacency of immediate predecessors.
    """

    p: int
    kinds: np.ndarray
    steps: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    costs: np.ndarray
    levels_of: np.ndarray
    pred_ptr: np.ndarray
    pred_idx: np.ndarray

    @property
    def task_count(self) -> int:
        return len(self.kinds)

    @property
    def n_levels(self) -> int:
        return int(self.levels_of.max()) + 1 if self.task_count else 0

    @property
    def levels(self) -> list[np.ndarray]:
        """Task ids grouped by level, construction order within each level."""
        order = np.argsort(self.levels_of, kind="stable")
        counts = np.bincount(self.levels_of, minlength=self.n_levels)
        return np.split(order, np.cumsum(counts)[:-1])

    def task(self, t: int) -> TaskView:
        return TaskView(
            int(self.kinds[t]),
            int(self.steps[t]),
            int(self.rows[t]),
            int(self.cols[t]),
            int(self.weights[t]),
            int(self.costs[t]),
            int(self.levels_of[t]),
        )

    def successors(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR adjacency (ptr, idx) of immediate successors."""
        nt = self.task_count
        src = self.pred_idx
        dst = np.repeat(
            np.arange(nt, dtype=np.int64), np.diff(self.pred_ptr).astype(np.int64)
        )
        order = np.argsort(src, kind="stable")
        ptr = np.zeros(nt + 1, dtype=np.int64)
        np.add.at(ptr, src + 1, 1)
        np.cumsum(ptr, out=ptr)
        return ptr, dst[order]


def dependency_levels(grid: BlockGrid) -> DependencyTree:
    """Build the static task DAG with ASAP levels.

    Per step i: GETRF(i,i) after every update into (i,i); panels after their
    GETRF and after updates into their own block; SSSSM(k,j,i) after both
    panels and after SSSSM(k,j,i') for the previous step i' touching (k,j).
    """
    p = grid.p
    bnnz = grid.block_nnz

    lowers = [grid.lower_blocks(i).tolist() for i in range(p)]
    uppers = [grid.upper_blocks(i).tolist() for i in range(p)]

    col_counts = {}
    row_counts = {}
    for key, blk in grid.blocks.items():
        col_counts[key] = blk.col_counts
        row_counts[key] = blk.row_counts

    kinds = array("b")
    steps = array("i")
    rows = array("i")
    cols = array("i")
    weights = array("q")
    costs = array("q")
    levels = array("i")
    preds = array("i")
    pred_cnt = array("i")

    # last SSSSM into each block: id and level ordering (-1 = none yet)
    last_id = [[-1] * p for _ in range(p)]
    last_lv = [[-1] * p for _ in range(p)]

    tid = 0
    for i in range(p):
        ups = uppers[i]
        lows = lowers[i]
        diag_nnz = int(bnnz[i, i])

        prev = last_id[i][i]
        lvl = last_lv[i][i] + 1
        kinds.append(GETRF)
        steps.append(i)
        rows.append(i)
        cols.append(i)
        weights.append(diag_nnz)
        costs.append(diag_nnz)
        levels.append(lvl)
        if prev >= 0:
            preds.append(prev)
            pred_cnt.append(1)
        else:
            pred_cnt.append(0)
        getrf_id, getrf_lv = tid, lvl
        tid += 1

        u_ids = {}
        u_lvs = {}
        for j in ups:
            prev = last_id[i][j]
            lvl = (getrf_lv if getrf_lv > last_lv[i][j] else last_lv[i][j]) + 1
            w = int(bnnz[i, j])
            kinds.append(GESSM)
            steps.append(i)
            rows.append(i)
            cols.append(j)
            weights.append(w)
            costs.append(w)
            levels.append(lvl)
            preds.append(getrf_id)
            if prev >= 0:
                preds.append(prev)
                pred_cnt.append(2)
            else:
                pred_cnt.append(1)
            u_ids[j] = tid
            u_lvs[j] = lvl
            tid += 1

        l_ids = {}
        l_lvs = {}
        for k in lows:
            prev = last_id[k][i]
            lvl = (getrf_lv if getrf_lv > last_lv[k][i] else last_lv[k][i]) + 1
            w = int(bnnz[k, i])
            kinds.append(TSTRF)
            steps.append(i)
            rows.append(k)
            cols.append(i)
            weights.append(w)
            costs.append(w)
            levels.append(lvl)
            preds.append(getrf_id)
            if prev >= 0:
                preds.append(prev)
                pred_cnt.append(2)
            else:
                pred_cnt.append(1)
            l_ids[k] = tid
            l_lvs[k] = lvl
            tid += 1

        for k in lows:
            ccnt_l = col_counts[(k, i)]
            tlv = l_lvs[k]
            tidk = l_ids[k]
            last_id_k = last_id[k]
            last_lv_k = last_lv[k]
            nnz_l = int(bnnz[k, i])
            for j in ups:
                # structural multiply-adds of this update
                madds = int(np.dot(ccnt_l, row_counts[(i, j)]))
                prev = last_id_k[j]
                plv = last_lv_k[j]
                lvl = tlv if tlv > u_lvs[j] else u_lvs[j]
                if plv > lvl:
                    lvl = plv
                lvl += 1
                nnz_u = int(bnnz[i, j])
                tgt = int(bnnz[k, j])
                w = nnz_l if nnz_l < nnz_u else nnz_u
                if 0 < tgt < w:
                    w = tgt
                kinds.append(SSSSM)
                steps.append(i)
                rows.append(k)
                cols.append(j)
                weights.append(w)
                costs.append(madds)
                levels.append(lvl)
                preds.append(tidk)
                preds.append(u_ids[j])
                if prev >= 0:
                    preds.append(prev)
                    pred_cnt.append(3)
                else:
                    pred_cnt.append(2)
                last_id_k[j] = tid
                last_lv_k[j] = lvl
                tid += 1

    pred_ptr = np.zeros(tid + 1, dtype=np.int64)
    if tid:
        pred_ptr[1:] = np.cumsum(np.frombuffer(pred_cnt, dtype=np.int32), dtype=np.int64)
    return DependencyTree(
        p=p,
        kinds=np.frombuffer(kinds, dtype=np.int8).copy(),
        steps=np.frombuffer(steps, dtype=np.int32).copy(),
        rows=np.frombuffer(rows, dtype=np.int32).copy(),
        cols=np.frombuffer(cols, dtype=np.int32).copy(),
        weights=np.frombuffer(weights, dtype=np.int64).copy(),
        costs=np.frombuffer(costs, dtype=np.int64).copy(),
        levels_of=np.frombuffer(levels, dtype=np.int32).copy(),
        pred_ptr=pred_ptr,
        pred_idx=np.frombuffer(preds, dtype=np.int32).copy(),
    )
