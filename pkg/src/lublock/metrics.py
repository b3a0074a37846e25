"""Load-balance statistics and a makespan model over the task DAG.

Block statistics quantify how evenly the nonzeros spread across blocks;
level statistics expose how work stacks up along the elimination, in both
the fine ASAP-level view and the coarse per-step view (last_level_share is
the final elimination step's share of total work). The makespan model runs
greedy largest-task-first list scheduling on identical workers.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import BadParams
from .grid import BlockGrid, DependencyTree


@dataclass
class BalanceReport:
    """Balance statistics; block and level parts are filled by their producers."""

    block_count: int | None = None
    nonempty_blocks: int | None = None
    nnz_min: int | None = None
    nnz_max: int | None = None
    nnz_mean: float | None = None
    cv: float | None = None
    cv_all_cells: float | None = None
    per_level_work: list | None = None
    per_step_work: list | None = None
    last_level_share: float | None = None
    total_work: int | None = None


def _cv(values: np.ndarray) -> float:
    mean = values.mean()
    if mean == 0:
        return 0.0
    return float(values.std() / mean)


def block_nnz_stats(grid: BlockGrid) -> BalanceReport:
    """Distribution of nonzeros over stored (nonempty) blocks.

    cv_all_cells additionally treats the empty cells of the p x p grid as
    zero-weight blocks, which is the occupancy-sensitive view.
    """
    counts = np.array([blk.nnz for blk in grid.blocks.values()], dtype=np.int64)
    return BalanceReport(
        block_count=grid.p,
        nonempty_blocks=len(counts),
        nnz_min=int(counts.min()),
        nnz_max=int(counts.max()),
        nnz_mean=float(counts.mean()),
        cv=_cv(counts.astype(np.float64)),
        cv_all_cells=_cv(grid.block_nnz.astype(np.float64).ravel()),
    )


def level_work_stats(tree: DependencyTree) -> BalanceReport:
    """Per-level and per-step work totals from the task cost model."""
    costs = tree.costs.astype(np.float64)
    total = float(costs.sum())
    levels = tree.levels_of
    n_levels = tree.n_levels
    lvl_total = np.bincount(levels, weights=costs, minlength=n_levels)
    lvl_count = np.bincount(levels, minlength=n_levels)
    lvl_max = np.zeros(n_levels)
    np.maximum.at(lvl_max, levels, costs)
    per_level = [
        (int(l), float(lvl_total[l]), float(lvl_max[l]), int(lvl_count[l]))
        for l in range(n_levels)
    ]
    steps = tree.steps
    n_steps = int(steps.max()) + 1 if len(steps) else 0
    step_total = np.bincount(steps, weights=costs, minlength=n_steps)
    step_count = np.bincount(steps, minlength=n_steps)
    per_step = [
        (int(s), float(step_total[s]), int(step_count[s])) for s in range(n_steps)
    ]
    share = float(step_total[-1] / total) if total > 0 else 0.0
    return BalanceReport(
        per_level_work=per_level,
        per_step_work=per_step,
        last_level_share=share,
        total_work=int(costs.sum()),
    )


def makespan_model(tree: DependencyTree, workers: int, cost=None) -> float:
    """Simulated finish time under greedy largest-task-first list scheduling.

    cost maps a TaskView to a nonnegative duration; the default is the
    tree's structural cost. Ties break on task id, so the simulation is
    deterministic.
    """
    if workers < 1:
        raise BadParams(f"workers must be >= 1, got {workers}")
    nt = tree.task_count
    if nt == 0:
        return 0.0
    if cost is None:
        durations = tree.costs.astype(np.float64)
    else:
        durations = np.array([float(cost(tree.task(t))) for t in range(nt)])

    succ_ptr, succ_idx = tree.successors()
    indeg = np.diff(tree.pred_ptr).astype(np.int64)
    ready = [(-durations[t], t) for t in np.flatnonzero(indeg == 0)]
    heapq.heapify(ready)
    running: list = []  # (finish_time, task)
    free = workers
    now = 0.0
    finished = 0
    def complete(t):
        nonlocal free, finished
        free += 1
        finished += 1
        for s in succ_idx[succ_ptr[t] : succ_ptr[t + 1]]:
            indeg[s] -= 1
            if indeg[s] == 0:
                heapq.heappush(ready, (-durations[s], int(s)))

    while finished < nt:
        while free and ready:
            negc, t = heapq.heappop(ready)
            heapq.heappush(running, (now - negc, t))
            free -= 1
        ft, t = heapq.heappop(running)
        now = ft
        complete(t)
        while running and running[0][0] == now:
            _, t2 = heapq.heappop(running)
            complete(t2)
    return now
