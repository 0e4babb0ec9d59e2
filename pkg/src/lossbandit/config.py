"""Numerical tolerances and resource caps shared across the package."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # algebraic identities evaluated in floating point
    identity: float = 1e-10
    # facts that hold exactly up to rounding
    exact: float = 1e-12
    # |phi1(0)| allowed by make_utility
    phi1_zero: float = 1e-12
    # theta == sigma_low / sigma_high coupling
    coupling: float = 1e-12
    # |log-odds| below this counts as mu == 1/2
    belief_tie: float = 1e-9
    # absolute target for adaptive quadrature
    quad_abs: float = 1e-11
    quad_rel: float = 1e-11


TOL = Tolerances()

# Peak number of lattice states held by one DP layer.
MAX_STATES = 10**8

# Default Euler-Maruyama resolution per unit time.
OBM_STEPS_PER_UNIT = 2048

DEFAULT_REPS = 100_000
