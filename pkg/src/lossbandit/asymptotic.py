"""Limiting value of the loss-averse bandit and the H_t value functions.

As the horizon grows, the optimal expected utility converges to the
expectation of the utility index under the time-1 law of the oscillating
Brownian motion with the extreme volatilities of the arms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .errors import CouplingError, ValidationError
from .obm import ObmParams, integration_window, normal_cdf, normal_pdf, time1_pdf, transition_density
from .quadrature import piecewise_quad
from .utility import UtilityIndex, eval_utility, exponential_utility


@dataclass(frozen=True)
class ValueResult:
    v: float
    method: str
    params: ObmParams
    utility: UtilityIndex
    error_estimate: float = 0.0

    def to_dict(self) -> dict:
        return {"v": self.v, "method": self.method, "error_estimate": self.error_estimate}


def check_coupling(u: UtilityIndex, params: ObmParams) -> None:
    """The limit theorem needs theta == sigma_low / sigma_high and a shared c."""
    if abs(u.theta - params.theta) > TOL.coupling:
        raise CouplingError(
            f"utility theta {u.theta!r} differs from sigma_low/sigma_high = {params.theta!r}"
        )
    if abs(u.c - params.c) > TOL.coupling:
        raise CouplingError(f"utility c {u.c!r} differs from diffusion threshold {params.c!r}")


def value_by_quadrature(u: UtilityIndex, params: ObmParams) -> ValueResult:
    check_coupling(u, params)
    a, b = integration_window(params)

    def integrand(y):
        return eval_utility(u, y) * time1_pdf(params, y)

    v, err = piecewise_quad(integrand, a, b, breaks=(params.c,))
    return ValueResult(v=v, method="quadrature", params=params, utility=u, error_estimate=err)


def value_exponential_closed_form(c: float, sigma_low: float, sigma_high: float) -> ValueResult:
    """Closed-form limit for phi1(x) = 1 - exp(-x)."""
    params = ObmParams(sigma_low, sigma_high, c)
    lo, hi = params.sigma_low, params.sigma_high
    Phi = normal_cdf
    if c <= 0:
        v = (
            Phi(-c / lo)
            - Phi(c / lo)
            + math.exp(lo**2 / 2)
            * (math.exp(-c) * Phi(-lo + c / lo) - math.exp(c) * Phi(-lo - c / lo))
        )
    else:
        m = lo * c / hi
        v = (hi / lo) * (
            Phi(-c / hi)
            - Phi(c / hi)
            + math.exp(lo**2 / 2) * (math.exp(-m) * Phi(-lo + c / hi) - math.exp(m) * Phi(-lo - c / hi))
        )
    u = exponential_utility(c, params.theta)
    return ValueResult(v=float(v), method="closed-form-exponential", params=params, utility=u)


def normal_expected_utility(u: UtilityIndex, sigma: float) -> float:
    """E[phi(Z)] for Z ~ N(0, sigma^2): the value of committing to one arm forever."""
    if not sigma > 0:
        raise ValidationError("sigma must be positive")
    width = 12.0 * sigma
    v, _ = piecewise_quad(
        lambda y: eval_utility(u, y) * normal_pdf(y, sigma), -width, width, breaks=(u.c,)
    )
    return v


def ht_value(u: UtilityIndex, params: ObmParams, t: float, x: float, h: float = 0.1) -> float:
    """H_t(x) = E[phi(Y_{1+h})] for the diffusion restarted at x at time t."""
    if not h > 0:
        raise ValidationError("h must be positive")
    end = 1.0 + h
    if t > end:
        raise ValidationError(f"t = {t} exceeds 1 + h = {end}")
    if t == end:
        return float(eval_utility(u, x))
    tau = end - t
    a, b = integration_window(params, x, tau)

    def integrand(y):
        return eval_utility(u, y) * transition_density(params, t, x, end, y)

    v, _ = piecewise_quad(integrand, a, b, breaks=(params.c, x))
    return v


def ht_semigroup_residual(
    u: UtilityIndex, params: ObmParams, t: float, r: float, x: float, h: float = 0.1
) -> float:
    """H_t(x) minus the integral of H_{t+r} against the transition density over [t, t+r]."""
    if not (r > 0 and t + r <= 1.0 + h):
        raise ValidationError("need r > 0 and t + r <= 1 + h")
    direct = ht_value(u, params, t, x, h)
    a, b = integration_window(params, x, r)
    inner = np.vectorize(lambda y: ht_value(u, params, t + r, y, h))

    def integrand(y):
        return inner(y) * transition_density(params, t, x, t + r, y)

    stepped, _ = piecewise_quad(integrand, a, b, breaks=(params.c, x), epsabs=1e-9, epsrel=1e-9)
    return direct - stepped
