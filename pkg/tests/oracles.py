"""Independent reference implementations used as test oracles.

These deliberately use different formulations from the library code:
set-based elimination instead of the elimination tree, brute-force
counting instead of the pointer recurrence, and a direct transcription
of the blocking scan. The dense LU oracle mirrors the library's pivot
rule and update order so bitwise comparison is meaningful.
"""

import numpy as np


def set_based_fill(n, pattern):
    """Brute-force symbolic elimination over a set of (row, col) pairs.

    Inserts (i, j) whenever (i, k) and (k, j) are present with i, j > k,
    processing k in natural order. Input must be symmetric with full
    diagonal; returns the filled set.
    """
    filled = set(pattern)
    for k in range(n):
        rows = [i for (i, kk) in filled if kk == k and i > k]
        cols = [j for (kk, j) in filled if kk == k and j > k]
        for i in rows:
            for j in cols:
                filled.add((i, j))
    return filled


def leading_submatrix_counts(n, pattern):
    """counts[k] = number of entries (i, j) with i < k and j < k."""
    counts = np.zeros(n + 1, dtype=np.int64)
    for (i, j) in pattern:
        counts[max(i, j) + 1 :] += 1
    return counts


def dense_lu_block_pivot(a, positions):
    """Right-looking dense LU with pivoting confined to diagonal blocks.

    Scalar-column elimination; the pivot search for column k only scans
    rows inside k's block. Returns (L unit lower, U upper, perm) where
    perm[r] is the original row now living at r.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    n = a.shape[0]
    perm = np.arange(n)
    block_end = np.zeros(n, dtype=np.int64)
    for b in range(len(positions) - 1):
        block_end[positions[b] : positions[b + 1]] = positions[b + 1]
    for k in range(n):
        e = block_end[k]
        pv = k + int(np.argmax(np.abs(a[k:e, k])))
        if a[pv, k] == 0.0:
            raise ZeroDivisionError(f"zero pivot at column {k}")
        if pv != k:
            a[[k, pv], :] = a[[pv, k], :]
            perm[[k, pv]] = perm[[pv, k]]
        a[k + 1 :, k] /= a[k, k]
        a[k + 1 :, k + 1 :] -= np.outer(a[k + 1 :, k], a[k, k + 1 :])
    lower = np.tril(a, -1) + np.eye(n)
    upper = np.triu(a)
    return lower, upper, perm


def blocking_scan(pct, n, step, max_num, threshold):
    """Direct transcription of the disjoint-window blocking scan."""
    sp = len(pct) - 1
    out = [0]
    skipped = 0
    i = 0
    while i < sp:
        hi = min(i + step, sp)
        if pct[hi] - pct[i] >= threshold:
            out.append(_rhu((i + step) * n, sp))
            skipped = 0
        elif skipped >= max_num:
            out.append(_rhu((i + step) * n, sp))
            skipped = 0
        else:
            skipped += 1
        i += step
    positions = [0]
    for pos in out[1:]:
        if pos >= n:
            break
        if pos > positions[-1]:
            positions.append(pos)
    positions.append(n)
    return positions


def _rhu(num, den):
    return (2 * num + den) // (2 * den)


def random_symmetric_pattern(n, rng, fill=0.15):
    """Random structurally symmetric pattern with full diagonal, as a set."""
    pattern = {(i, i) for i in range(n)}
    m = int(fill * n * n / 2)
    rows = rng.integers(0, n, size=m)
    cols = rng.integers(0, n, size=m)
    for i, j in zip(rows, cols):
        if i != j:
            pattern.add((int(i), int(j)))
            pattern.add((int(j), int(i)))
    return pattern


def pattern_to_matrix(n, pattern, rng=None):
    """CscMatrix from a pattern set; random diagonally dominant values."""
    from lublock import csc_from_triplets

    entries = sorted(pattern)
    if rng is None:
        vals = [1.0] * len(entries)
    else:
        vals = rng.uniform(-1.0, 1.0, len(entries)).tolist()
    trips = []
    rowsums = np.zeros(n)
    for (i, j), v in zip(entries, vals):
        if i != j:
            trips.append((i, j, v))
            rowsums[i] += abs(v)
    for i in range(n):
        trips.append((i, i, rowsums[i] + 1.0))
    return csc_from_triplets(n, trips)
