"""Blocking plans: irregular (curve-driven), regular, and a size selector.

The irregular method walks the percentage curve in disjoint windows of
`step` samples. A window whose rise meets the threshold marks a split at
the window's right edge (dense region, fine blocks); otherwise the window
is skipped, and after max_num consecutive skips a split is forced so no
block grows unbounded. The default threshold is the linear difference
step/sample_points: regions rising faster than a uniform banded matrix
count as dense.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParams, DegenerateCurve
from .features import PercentCurve

DEFAULT_STEP = 2
DEFAULT_MAX_NUM = 3

PANGULU_SIZES = (200, 300, 500, 1000, 2000, 5000)


@dataclass
class BlockingPlan:
    """Strictly increasing split positions tiling [0, n)."""

    n: int
    positions: np.ndarray
    strategy: str
    params: dict = field(default_factory=dict)

    @property
    def p(self) -> int:
        return len(self.positions) - 1

    @property
    def spans(self) -> np.ndarray:
        return np.diff(self.positions)


def _round_half_up(num: int, den: int) -> int:
    return (2 * num + den) // (2 * den)


def irregular_plan(
    curve: PercentCurve,
    n: int,
    step: int = DEFAULT_STEP,
    max_num: int = DEFAULT_MAX_NUM,
    threshold: float | str = "linear",
    overlapping_windows: bool = False,
) -> BlockingPlan:
    """Curve-driven irregular blocking.

    threshold may be a fraction in (0, 1] or the sentinel "linear" for
    step/sample_points. overlapping_windows advances the scan one sample at
    a time (the literal pseudocode reading) instead of one window at a time;
    positions are deduplicated either way.
    """
    sp = curve.sample_points
    if n != curve.n:
        raise BadParams(f"curve built for n={curve.n}, plan requested for n={n}")
    if not (1 <= step < sp):
        raise BadParams(f"step must satisfy 1 <= step < sample_points, got {step}")
    if max_num < 1:
        raise BadParams(f"max_num must be >= 1, got {max_num}")
    if threshold == "linear":
        threshold = step / sp
    threshold = float(threshold)
    if not (0.0 < threshold <= 1.0):
        raise BadParams(f"threshold must be in (0, 1], got {threshold}")
    pct = curve.pct
    if pct[-1] <= pct[0]:
        raise DegenerateCurve("curve does not rise")

    positions = [0]
    skipped = 0
    advance = 1 if overlapping_windows else step
    i = 0
    while i < sp:
        hi = min(i + step, sp)
        if pct[hi] - pct[i] >= threshold:
            positions.append(_round_half_up((i + step) * n, sp))
            skipped = 0
        elif skipped >= max_num:
            positions.append(_round_half_up((i + step) * n, sp))
            skipped = 0
        else:
            skipped += 1
        i += advance

    # force the final position, clamp overshoot, drop duplicates
    out = [0]
    for pos in positions[1:]:
        if pos >= n:
            break
        if pos > out[-1]:
            out.append(pos)
    out.append(n)
    return BlockingPlan(
        n=n,
        positions=np.asarray(out, dtype=np.int64),
        strategy="irregular",
        params={
            "sample_points": sp,
            "step": step,
            "max_num": max_num,
            "threshold": threshold,
        },
    )


def regular_plan(n: int, block_size: int) -> BlockingPlan:
    """Uniform tiling; the last block may be smaller."""
    if not (1 <= block_size <= n):
        raise BadParams(f"block_size must satisfy 1 <= bs <= n, got {block_size}")
    positions = list(range(0, n, block_size)) + [n]
    return BlockingPlan(
        n=n,
        positions=np.asarray(positions, dtype=np.int64),
        strategy="regular",
        params={"block_size": block_size},
    )


def pangulu_size_select(n: int, nnz_filled: int) -> int:
    """Deterministic lookup-table stand-in for PanguLU's block-size selection.

    Base size is the smallest candidate covering n/10 (capped at the largest
    candidate); very sparse matrices step down the candidate list, one step
    per two decades of density below 1e-4. Monotone in n at fixed density.
    Callers clamp the result to n.
    """
    if n < 1:
        raise BadParams(f"n must be >= 1, got {n}")
    density = nnz_filled / float(n) / float(n)
    base_idx = len(PANGULU_SIZES) - 1
    for i, size in enumerate(PANGULU_SIZES):
        if size * 10 >= n:
            base_idx = i
            break
    steps_down = 0
    if density < 1e-4:
        steps_down = 1
    if density < 1e-6:
        steps_down = 2
    return PANGULU_SIZES[max(0, base_idx - steps_down)]
