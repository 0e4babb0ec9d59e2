"""Compiled sweeps for the two-armed learning lattice.

Layer ``m`` (outcomes observed) stores states ``(s, d1, d2)``: the running
sum, the nonzero-count difference between arms a and b, and the
zero-count difference.  The posterior log-odds is ``L1 + d1*alpha +
d2*beta``.  Parity ties ``d1`` to ``s`` and ``d2`` to ``m - s``, so a layer
is stored as a ``(2m+1, m+1, m+1)`` array indexed by ``s + m``,
``(d1 + m) >> 1`` and ``(d2 + m) >> 1``.  Reachable states satisfy
``max(|s|, |d1|) + |d2| <= m``.

Strategy codes: 0 optimal (ties to the lower-variance arm, then a),
1 myopic learning rule, 2 always a, 3 always b.
"""

import math

import numpy as np
from numba import njit

OPTIMAL, LEARNING_RULE, ALWAYS_A, ALWAYS_B = 0, 1, 2, 3


@njit(cache=True)
def _d1(m, i_s, i1):
    return 2 * i1 - m + (i_s & 1)


@njit(cache=True)
def _d2(m, i_s, i2):
    # d2 + m has the parity of s = i_s - m
    return 2 * i2 - m + ((i_s - m) & 1)


@njit(cache=True)
def _choose(code, m, s, L, va, vb, pa, pb, tie):
    """Return 0 for arm a, 1 for arm b."""
    if code == ALWAYS_A:
        return 0
    if code == ALWAYS_B:
        return 1
    if code == LEARNING_RULE:
        if m == 0:
            return 0
        if (s <= 0 and L < -tie) or (s > 0 and L > tie):
            return 0
        return 1
    if va > vb:
        return 0
    if vb > va:
        return 1
    if pb < pa:
        return 1
    return 0


@njit(cache=True)
def backward_layer(m, nxt, code, L1, alpha, beta, pl, ph, tie, out_val, out_arg):
    """Fill layer ``m`` from layer ``m + 1``; unreachable cells are left untouched."""
    for i_s in range(2 * m + 1):
        s = i_s - m
        js = i_s + 1  # s index in layer m+1 is s + m + 1
        for i1 in range(m + 1):
            d1 = _d1(m, i_s, i1)
            a1 = abs(d1)
            if a1 > m:
                continue
            base = max(abs(s), a1)
            for i2 in range(m + 1):
                d2 = _d2(m, i_s, i2)
                if base + abs(d2) > m:
                    continue
                L = L1 + d1 * alpha + d2 * beta
                mu = 1.0 / (1.0 + math.exp(-L))
                pa = mu * pl + (1.0 - mu) * ph
                pb = (1.0 - mu) * pl + mu * ph
                n1 = m + 1
                ia = (d1 + 1 + n1) >> 1
                ib = (d1 - 1 + n1) >> 1
                i2c = (d2 + n1) >> 1
                za = (d2 + 1 + n1) >> 1
                zb = (d2 - 1 + n1) >> 1
                i1c = (d1 + n1) >> 1
                va = 0.5 * pa * (nxt[js + 1, ia, i2c] + nxt[js - 1, ia, i2c]) + (1.0 - pa) * nxt[js, i1c, za]
                vb = 0.5 * pb * (nxt[js + 1, ib, i2c] + nxt[js - 1, ib, i2c]) + (1.0 - pb) * nxt[js, i1c, zb]
                arm = _choose(code, m, s, L, va, vb, pa, pb, tie)
                out_val[i_s, i1, i2] = va if arm == 0 else vb
                out_arg[i_s, i1, i2] = arm


@njit(cache=True)
def forward_layer(m, cur, code, L1, alpha, beta, pl, ph, tie, nxt):
    """Push the probability mass of layer ``m`` into layer ``m + 1`` (``nxt`` zeroed by caller)."""
    for i_s in range(2 * m + 1):
        s = i_s - m
        js = i_s + 1
        for i1 in range(m + 1):
            d1 = _d1(m, i_s, i1)
            a1 = abs(d1)
            if a1 > m:
                continue
            base = max(abs(s), a1)
            for i2 in range(m + 1):
                d2 = _d2(m, i_s, i2)
                if base + abs(d2) > m:
                    continue
                w = cur[i_s, i1, i2]
                if w == 0.0:
                    continue
                L = L1 + d1 * alpha + d2 * beta
                mu = 1.0 / (1.0 + math.exp(-L))
                pa = mu * pl + (1.0 - mu) * ph
                pb = (1.0 - mu) * pl + mu * ph
                arm = _choose(code, m, s, L, 0.0, 0.0, pa, pb, tie)
                n1 = m + 1
                if arm == 0:
                    p, step = pa, 1
                else:
                    p, step = pb, -1
                i1n = (d1 + step + n1) >> 1
                i2c = (d2 + n1) >> 1
                nxt[js + 1, i1n, i2c] += 0.5 * p * w
                nxt[js - 1, i1n, i2c] += 0.5 * p * w
                nxt[js, (d1 + n1) >> 1, (d2 + step + n1) >> 1] += (1.0 - p) * w


def terminal_layer(n, values_by_sum):
    """Layer ``n`` whose value depends on the running sum only."""
    out = np.empty((2 * n + 1, n + 1, n + 1))
    out[:] = np.asarray(values_by_sum, dtype=float)[:, None, None]
    return out


def layer_shape(m):
    return (2 * m + 1, m + 1, m + 1)
