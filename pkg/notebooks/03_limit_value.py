# # The large-horizon value
#
# As the horizon grows the best achievable expected utility converges to the
# expectation of phi under the time-1 law of the oscillating motion whose
# volatilities are the extreme arm volatilities.

from lossbandit import (
    ObmParams,
    exponential_utility,
    normal_expected_utility,
    value_by_quadrature,
    value_exponential_closed_form,
)

for c in (-1.0, -0.5, 0.0, 0.5, 1.0):
    u = exponential_utility(c, theta=0.5)
    closed = value_exponential_closed_form(c, 0.5, 1.0).v
    quad = value_by_quadrature(u, ObmParams(0.5, 1.0, c)).v
    print(f"c={c:5.2f}  V={closed:+.10f}  quad={quad:+.10f}  phi(0)={u(0.0):+.6f}")

# At c = 0 the limit is exactly phi(0) = 0, while committing to either arm
# forever gives a strictly negative value.
u0 = exponential_utility(0.0, 0.5)
for s in (0.5, 1.0):
    print(f"single arm sigma={s}: {normal_expected_utility(u0, s):+.6f}")
