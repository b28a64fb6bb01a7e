"""Compiled propagation kernels for :mod:`n3il.search`.

State layout (all int64 numpy arrays):

* ``cptr, cvar, cwt``: constraints as CSR; ``vptr, vcon, vwt``: occurrences.
* ``is_eq, maxw``: per constraint.
* ``val``: -1 unassigned, else 0/1.  ``com``/``rem``: committed/remaining weight.
* ``trail``: assigned variables in order; ``ptr[0]`` is its length and
  ``ptr[1]`` how many trail entries have been applied to the counters.
"""

from __future__ import annotations

import numpy as np
from numba import njit

BOUND = 2


@njit(cache=True)
def _set(v, b, val, trail, ptr):
    cur = val[v]
    if cur == -1:
        val[v] = b
        trail[ptr[0]] = v
        ptr[0] += 1
        return True
    return cur == b


@njit(cache=True)
def propagate(lit_vars, lit_vals, cptr, cvar, cwt, vptr, vcon, vwt, is_eq, maxw, val, com, rem, trail, ptr):
    """Assign the literals and propagate to fixpoint; conflicting constraint or -1."""
    for k in range(lit_vars.shape[0]):
        if not _set(lit_vars[k], lit_vals[k], val, trail, ptr):
            v = lit_vars[k]
            return vcon[vptr[v]] if vptr[v + 1] > vptr[v] else cptr.shape[0] - 1
    while ptr[1] < ptr[0]:
        v = trail[ptr[1]]
        ptr[1] += 1
        b = val[v]
        conflict = -1
        for t in range(vptr[v], vptr[v + 1]):
            c = vcon[t]
            w = vwt[t]
            rem[c] -= w
            if b == 1:
                com[c] += w
            if conflict >= 0:
                continue
            cc = com[c]
            if cc > BOUND or (is_eq[c] and cc + rem[c] < BOUND):
                conflict = c
                continue
            scan = cc + maxw[c] > BOUND or (is_eq[c] and cc + rem[c] - maxw[c] < BOUND)
            if not scan:
                continue
            slack = BOUND - cc
            need = cc + rem[c] - BOUND
            for s in range(cptr[c], cptr[c + 1]):
                u = cvar[s]
                if val[u] != -1:
                    # already fixed; a clash shows up in the counters once applied
                    continue
                wu = cwt[s]
                if wu > slack:
                    _set(u, 0, val, trail, ptr)
                elif is_eq[c] and wu > need:
                    _set(u, 1, val, trail, ptr)
        if conflict >= 0:
            return conflict
    return -1


@njit(cache=True)
def undo(mark, vptr, vcon, vwt, val, com, rem, trail, ptr):
    k = ptr[0] - 1
    while k >= mark:
        v = trail[k]
        if k < ptr[1]:
            b = val[v]
            for t in range(vptr[v], vptr[v + 1]):
                c = vcon[t]
                rem[c] += vwt[t]
                if b == 1:
                    com[c] -= vwt[t]
        val[v] = -1
        k -= 1
    ptr[0] = mark
    if ptr[1] > mark:
        ptr[1] = mark


@njit(cache=True)
def completion_counts(eq_ids, cptr, cvar, cwt, val, com):
    """Ways to complete each equality with 1 or 2 unassigned variables.

    -1 marks an equality that is already satisfied.
    """
    out = np.empty(eq_ids.shape[0], np.int64)
    for k in range(eq_ids.shape[0]):
        c = eq_ids[k]
        d = BOUND - com[c]
        if d <= 0:
            out[k] = -1
            continue
        ones = 0
        exact = 0
        for s in range(cptr[c], cptr[c + 1]):
            if val[cvar[s]] == -1:
                if cwt[s] == 1:
                    ones += 1
                if cwt[s] == d:
                    exact += 1
        if d == 1:
            out[k] = ones
        else:
            out[k] = ones * (ones - 1) // 2 + exact
    return out


_warm = False


def warm() -> None:
    """Load or compile every kernel once, so that solve timings exclude it."""
    global _warm
    if _warm:
        return
    one = np.ones(1, np.int64)
    ptr01 = np.array([0, 1], np.int64)
    zero = np.zeros(1, np.int64)
    val = np.full(1, -1, np.int64)
    trail, ptr = np.zeros(1, np.int64), np.zeros(2, np.int64)
    com, rem = np.zeros(1, np.int64), one.copy()
    propagate(zero, zero, ptr01, zero, one, ptr01, zero, one, zero, one, val, com, rem, trail, ptr)
    undo(0, ptr01, zero, one, val, com, rem, trail, ptr)
    completion_counts(zero, ptr01, zero, one, val, com)
    _warm = True
