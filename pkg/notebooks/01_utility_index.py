# # The loss-averse utility index
#
# Gains are valued through a concave function, losses through its reflection
# stretched by 1/theta.  With the exponential gain function and theta = 0.5 a
# loss of one unit hurts more than a gain of one unit pleases.

import numpy as np

from lossbandit import eval_utility, exponential_utility, loss_aversion_measure

u = exponential_utility(c=0.0, theta=0.5)
print("phi(1)  =", eval_utility(u, 1.0))
print("phi(-1) =", eval_utility(u, -1.0))

xs = np.linspace(-2, 2, 9)
print(np.column_stack([xs, u(xs)]))

# The gap phi(x) + phi(-x) is negative for every x > 0.
print("phi(x) + phi(-x):", u(xs[xs > 0]) + u(-xs[xs > 0]))

# A lottery winning x with weight 2p and losing 2x with weight p is exactly
# as good as standing still, so the loss-aversion measure is 1/theta - 1.
print("measure:", loss_aversion_measure(u))
print("2 phi(1) + phi(-2) =", 2 * u(1.0) + u(-2.0))

# Moving the reference point shifts the kink.
v = exponential_utility(c=0.5, theta=0.8)
print("reference 0.5:", v(np.array([0.0, 0.5, 1.0])))
