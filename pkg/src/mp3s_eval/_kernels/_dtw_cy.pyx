# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled alignment kernel; see `_dtw_py` for the kernel contract.

Mirrors the pure-Python implementation statement for statement so results
are bit-identical.  The DP fill and traceback run without the GIL, so
callers can parallelize over independent alignments with threads.
"""

import numpy as np


def align(dist):
    """Minimal-cost monotone alignment through a distance matrix.

    Args:
        dist: [T_A, T_B] matrix of finite frame distances.

    Returns:
        (accumulated_cost, path) — see the `_dtw_py.align` contract.
    """
    d = np.ascontiguousarray(dist, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] < 1 or d.shape[1] < 1:
        raise ValueError(f"distance matrix must be [T_A >= 1, T_B >= 1], got shape {d.shape}")

    cdef double[:, ::1] dv = d
    cdef Py_ssize_t ta = dv.shape[0]
    cdef Py_ssize_t tb = dv.shape[1]

    acc_arr = np.empty((ta, tb), dtype=np.float64)
    path_arr = np.empty((ta + tb - 1, 2), dtype=np.int64)
    cdef double[:, ::1] acc = acc_arr
    cdef long long[:, ::1] path = path_arr

    cdef Py_ssize_t i, j, pos
    cdef double best, diag, up, left

    with nogil:
        acc[0, 0] = dv[0, 0]
        for i in range(1, ta):
            acc[i, 0] = acc[i - 1, 0] + dv[i, 0]
        for j in range(1, tb):
            acc[0, j] = acc[0, j - 1] + dv[0, j]
        for i in range(1, ta):
            for j in range(1, tb):
                best = acc[i - 1, j - 1]
                up = acc[i - 1, j]
                left = acc[i, j - 1]
                if up < best:
                    best = up
                if left < best:
                    best = left
                acc[i, j] = dv[i, j] + best

        i = ta - 1
        j = tb - 1
        pos = ta + tb - 2
        path[pos, 0] = i
        path[pos, 1] = j
        while i > 0 or j > 0:
            if i == 0:
                j -= 1
            elif j == 0:
                i -= 1
            else:
                diag = acc[i - 1, j - 1]
                up = acc[i - 1, j]
                left = acc[i, j - 1]
                if diag <= up and diag <= left:
                    i -= 1
                    j -= 1
                elif up <= left:
                    i -= 1
                else:
                    j -= 1
            pos -= 1
            path[pos, 0] = i
            path[pos, 1] = j

    return float(acc_arr[ta - 1, tb - 1]), path_arr[pos:].copy()
