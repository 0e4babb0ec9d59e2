# # Simulation
#
# Each replication has its own counter-based stream, so results do not depend
# on how replications are grouped.  The stage-n ratio of volatile to quiet
# pulls under s* tends to sigma_low / sigma_high.

from lossbandit import (
    NoLearningEnv,
    TwoArmedEnv,
    exponential_utility,
    posterior_consistency,
    s_star,
    s_star_learning,
    simulate_paths,
    single_arm,
    strategy_value_n,
    symmetric_arm,
)

env = NoLearningEnv((symmetric_arm(0.5, "low"), symmetric_arm(1.0, "high")))
u = exponential_utility(0.0, 0.5)

n = 400
rep = simulate_paths(env, s_star(), n, 20_000, seed=7, u=u, persistence_N=10)
exact = strategy_value_n(env, s_star(), u, n)
print(f"MC {rep.value_estimate:+.5f} +- {rep.std_error:.5f}   exact {exact:+.5f}")
print("stage-n high/low ratio:", round(rep.final_ratio, 3))
print("P(S/sqrt(n) >= 0):", rep.indicator_frequency)
print("window persistence <=0 / >0:", rep.persistence_le, rep.persistence_gt)

# With S_n / n the limit is phi(0) = 0 whatever the strategy.
for s in (s_star(), single_arm("low"), single_arm("high")):
    r = simulate_paths(env, s, 2000, 5000, seed=1, u=u, scaling="linear")
    print(s.selector, f"{r.value_estimate:+.2e}")

two = TwoArmedEnv(0.2, 0.8, 0.5)
print(posterior_consistency(two, "a", s_star_learning(), 300, 2000, seed=3))
