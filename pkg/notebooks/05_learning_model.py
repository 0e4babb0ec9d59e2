# # Two arms, unknown volatilities
#
# One arm has nonzero-outcome probability 0.2, the other 0.8, and the agent
# does not know which.  Beliefs are carried as log-odds and updated after each
# pull; the state space of the exact DP is cubic in the horizon.

import itertools

from lossbandit import (
    History,
    TwoArmedEnv,
    exponential_utility,
    path_probability,
    s_star_learning,
    strategy_value_n,
    value_n,
)
from lossbandit.bandit import chain_probability, replay

env = TwoArmedEnv(0.2, 0.8, mu1=0.5)
u = exponential_utility(0.0, 0.5)

h = History.start(env)
for arm, o in [("a", 1), ("a", 0), ("b", 0), ("b", -1)]:
    h = h.advance(env, arm, o)
    print(f"pull {arm} -> {o:+d}: mu = {h.belief.mu:.4f}, sum = {h.total}")

# Path probabilities from the two-scenario mixture agree with the chain rule.
s = s_star_learning()
total = 0.0
for path in itertools.product((1, 0, -1), repeat=3):
    p = path_probability(env, s, path)
    assert abs(p - chain_probability(env, s, path)) < 1e-14
    total += p
print("sum over 27 paths:", total)
print("actions along (1, 1, 0):", replay(env, s, (1, 1, 0))[0])

for n in (1, 5, 20, 80):
    v, _ = value_n(env, u, n, keep_layers=False)
    us = strategy_value_n(env, s, u, n)
    print(f"n={n:3d}  V_n={v:+.6f}  U_n(s*)={us:+.6f}  gap={v - us:.2e}")
