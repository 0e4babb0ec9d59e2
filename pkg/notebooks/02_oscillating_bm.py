# # Oscillating Brownian motion
#
# dY = sigma(Y) dB with sigma = sigma_low above the threshold c and
# sigma_high below.  The time-1 density is piecewise Gaussian with a jump at c.

import numpy as np
from scipy import integrate, stats

from lossbandit import ObmParams, indicator_prob, sample_endpoints, sample_path, time1_pdf
from lossbandit.obm import time1_cdf

p = ObmParams(sigma_low=0.5, sigma_high=1.0, c=0.0)

ys = np.linspace(-3, 3, 13)
for y, q in zip(ys, time1_pdf(p, ys)):
    print(f"{y:5.2f}  {q:.6f}")

# the density jumps at c: mass piles up on the quiet side
print("q(0-) =", time1_pdf(p, -1e-12), " q(0+) =", time1_pdf(p, 0.0))

mass = integrate.quad(lambda y: time1_pdf(p, y), -12, 0)[0] + integrate.quad(lambda y: time1_pdf(p, y), 0, 12)[0]
print("total mass:", mass)
print("P(W_1 >= 0) =", indicator_prob(p), " (2/3)")

# an Euler-Maruyama path, then a Kolmogorov-Smirnov check of many endpoints
path = sample_path(p, start=0.0, t_end=1.0, n_steps=8, seed=1)
print(np.column_stack([path.times, path.values]))

ends = sample_endpoints(p, reps=20_000, seed=1, n_steps=512)
print("KS distance:", stats.kstest(ends, lambda v: time1_cdf(p, v)).statistic)

# threshold below the start
pn = ObmParams(0.5, 1.0, -0.5)
print("c = -0.5, P(W_1 >= c) =", indicator_prob(pn))
