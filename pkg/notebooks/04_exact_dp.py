# # Exact finite-horizon values
#
# Backward induction on the lattice of cumulative sums.  Arms pay +-0.5 or +-1
# with equal odds.  The switching rule s* (volatile arm when behind, quiet arm
# when ahead) is not optimal at n = 1 but its gap vanishes as n grows.

import time

import numpy as np

from lossbandit import (
    NoLearningEnv,
    exponential_utility,
    parity_averaged_indicator,
    s_star,
    strategy_value_n,
    symmetric_arm,
    value_n,
)

env = NoLearningEnv((symmetric_arm(0.5, "low"), symmetric_arm(1.0, "high")))
u = exponential_utility(0.0, 0.5)

ns = [1, 4, 16, 64, 256, 1024, 4096]
rows = []
for n in ns:
    t0 = time.perf_counter()
    v, _ = value_n(env, u, n)
    us = strategy_value_n(env, s_star(), u, n)
    rows.append((n, v, us, v - us, time.perf_counter() - t0))
    print(f"n={n:5d}  V_n={v:+.3e}  U_n(s*)={us:+.3e}  gap={v - us:.2e}")

slope = np.polyfit(np.log(ns[2:]), np.log([abs(r[1]) for r in rows[2:]]), 1)[0]
print("log-log slope of |V_n|:", slope)

# Optimal decisions at a few states for n = 4
_, table = value_n(env, u, 4, keep_layers=True)
for stage, total, _, _, value, arm in list(table.rows())[:10]:
    print(stage, total, round(value, 6), arm)

# Upper probability of ending at or above 0, averaged over two parities
print(parity_averaged_indicator(env, 0.0, 2000))
