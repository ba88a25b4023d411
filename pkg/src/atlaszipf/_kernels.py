"""Compiled inner loops for the Euler scheme."""

import numba
import numpy as np


@numba.njit(cache=True)
def sort_order(x, order):
    """Insertion-sort ``order`` so that ``x[order]`` is nonincreasing.

    Equal values keep the lower index first. Cheap when ``order`` is already
    nearly sorted, which is the case between consecutive time steps.
    """
    n = x.size
    for i in range(1, n):
        a = order[i]
        xa = x[a]
        j = i - 1
        while j >= 0:
            b = order[j]
            xb = x[b]
            if xb > xa or (xb == xa and b < a):
                break
            order[j + 1] = b
            j -= 1
        order[j + 1] = a


@numba.njit(cache=True)
def euler_rank_steps(x, order, drift_dt, vol_sqdt, xi, out, record_from):
    """Advance ``x`` through ``xi.shape[0]`` rank-based Euler steps in place.

    ``drift_dt[r]`` and ``vol_sqdt[r]`` are the increments for the process in
    rank ``r`` (0-based). The state before local step ``s`` is written to
    ``out[s - record_from]`` when ``s >= record_from``. Returns the local
    index of the first step producing a non-finite value, or -1.
    """
    n = x.size
    steps = xi.shape[0]
    for s in range(steps):
        if s >= record_from:
            for i in range(n):
                out[s - record_from, i] = x[i]
        sort_order(x, order)
        for r in range(n):
            i = order[r]
            x[i] = x[i] + (drift_dt[r] + vol_sqdt[r] * xi[s, i])
        for i in range(n):
            if not np.isfinite(x[i]):
                return s
    return -1
