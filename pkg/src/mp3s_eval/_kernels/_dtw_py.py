"""Pure-Python alignment kernel: the reference implementation and fallback.

The compiled kernel (`_dtw_cy`) mirrors this code statement for statement.
Both perform the same IEEE-754 double operations in the same order, so their
outputs are bit-identical; tests assert that equivalence.

Kernel contract
---------------
``align(dist)`` takes a C-contiguous float64 cost matrix ``dist[i, j]`` (the
per-frame distance between frame i of sequence A and frame j of sequence B)
and returns ``(accumulated_cost, path)`` where

* ``path`` is an int64 array of shape [P, 2] of (i, j) index pairs, starting
  at (0, 0) and ending at (T_A − 1, T_B − 1), with consecutive steps in
  {(1, 0), (0, 1), (1, 1)};
* ``accumulated_cost`` equals the sum of ``dist`` along ``path`` (exactly —
  the DP accumulates in path order), minimal over all admissible paths;
* traceback ties prefer the diagonal step, then (1, 0), then (0, 1).
"""

from __future__ import annotations

import numpy as np


def align(dist: np.ndarray) -> tuple[float, np.ndarray]:
    """Minimal-cost monotone alignment through a distance matrix.

    Args:
        dist: [T_A, T_B] matrix of finite frame distances.

    Returns:
        (accumulated_cost, path) per the kernel contract above.
    """
    d = np.ascontiguousarray(dist, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] < 1 or d.shape[1] < 1:
        raise ValueError(f"distance matrix must be [T_A >= 1, T_B >= 1], got shape {d.shape}")
    ta, tb = d.shape
    rows = d.tolist()

    acc = [[0.0] * tb for _ in range(ta)]
    acc[0][0] = rows[0][0]
    for i in range(1, ta):
        acc[i][0] = acc[i - 1][0] + rows[i][0]
    for j in range(1, tb):
        acc[0][j] = acc[0][j - 1] + rows[0][j]
    for i in range(1, ta):
        prev = acc[i - 1]
        cur = acc[i]
        row = rows[i]
        for j in range(1, tb):
            best = prev[j - 1]
            up = prev[j]
            left = cur[j - 1]
            if up < best:
                best = up
            if left < best:
                best = left
            cur[j] = row[j] + best

    i, j = ta - 1, tb - 1
    rev = [(i, j)]
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag = acc[i - 1][j - 1]
            up = acc[i - 1][j]
            left = acc[i][j - 1]
            if diag <= up and diag <= left:
                i -= 1
                j -= 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        rev.append((i, j))
    rev.reverse()
    return acc[ta - 1][tb - 1], np.array(rev, dtype=np.int64)
