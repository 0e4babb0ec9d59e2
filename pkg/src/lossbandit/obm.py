"""Oscillating Brownian motion.

``dY = sigma(Y) dB`` with ``sigma(y) = sigma_low`` for ``y >= c`` and
``sigma_high`` for ``y < c``.  The scaled process ``(Y - c) / sigma(Y)`` is a
skew Brownian motion with skewness ``(sigma_high - sigma_low) /
(sigma_high + sigma_low)``, which gives the closed-form transition density
used throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .config import OBM_STEPS_PER_UNIT
from .errors import ValidationError
from .rng import BlockStreams, blocks, stream

_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class ObmParams:
    sigma_low: float
    sigma_high: float
    c: float = 0.0

    def __post_init__(self):
        lo, hi = float(self.sigma_low), float(self.sigma_high)
        if not (np.isfinite(lo) and np.isfinite(hi) and np.isfinite(self.c)):
            raise ValidationError("OBM parameters must be finite")
        if not 0.0 < lo <= hi:
            raise ValidationError(f"need 0 < sigma_low <= sigma_high, got {lo}, {hi}")

    @property
    def theta(self) -> float:
        return self.sigma_low / self.sigma_high

    @property
    def skew(self) -> float:
        return (self.sigma_high - self.sigma_low) / (self.sigma_high + self.sigma_low)

    def sigma(self, y):
        """Diffusion coefficient; ``y == c`` takes the low value."""
        y = np.asarray(y, dtype=float)
        out = np.where(y >= self.c, self.sigma_low, self.sigma_high)
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {"sigma_low": self.sigma_low, "sigma_high": self.sigma_high, "c": self.c}


@dataclass(frozen=True)
class ObmPath:
    times: np.ndarray
    values: np.ndarray
    seed: int


def normal_cdf(x):
    """Standard normal cdf (erf based)."""
    out = ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def normal_pdf(y, sigma: float = 1.0):
    y = np.asarray(y, dtype=float)
    return np.exp(-0.5 * (y / sigma) ** 2) / (_SQRT2PI * sigma)


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def time1_pdf(params: ObmParams, y):
    """Density of the time-1 value started at 0.

    For ``c >= 0`` the start lies in the high-variance region; for ``c < 0``
    it lies in the low-variance region, which moves the start's scaled
    distance to the threshold from ``-c / sigma_high`` to ``-c / sigma_low``.
    """
    lo, hi, c, k = params.sigma_low, params.sigma_high, params.c, params.skew
    y = np.asarray(y, dtype=float)
    z0 = -c / hi if c >= 0 else -c / lo
    up = y >= c
    zu = (y - c) / lo
    zd = (y - c) / hi
    upper = (np.exp(-0.5 * (z0 - zu) ** 2) + k * np.exp(-0.5 * (abs(z0) + zu) ** 2)) / (lo * _SQRT2PI)
    lower = (np.exp(-0.5 * (z0 - zd) ** 2) - k * np.exp(-0.5 * (abs(z0) - zd) ** 2)) / (hi * _SQRT2PI)
    return _scalar(np.where(up, upper, lower))


def time1_cdf(params: ObmParams, y):
    """P(W_1 <= y), the integral of :func:`time1_pdf`."""
    lo, hi, c, k = params.sigma_low, params.sigma_high, params.c, params.skew
    y = np.asarray(y, dtype=float)
    z0 = -c / hi if c >= 0 else -c / lo
    a0 = abs(z0)
    zu = (y - c) / lo
    zd = (y - c) / hi
    below_c = ndtr(-z0) - k * ndtr(-a0)
    upper = below_c + (ndtr(zu - z0) - ndtr(-z0)) + k * (ndtr(a0 + zu) - ndtr(a0))
    lower = ndtr(zd - z0) - k * ndtr(zd - a0)
    return _scalar(np.where(y >= c, upper, lower))


def transition_density(params: ObmParams, t: float, x, s: float, y):
    """q^c(t, x; s, y), the density of Y_s given Y_t = x.

    ``sgn(y - c)`` is +1 at ``y = c`` so the threshold belongs to the
    low-variance branch, matching ``sigma``.
    """
    if not s > t:
        raise ValidationError(f"transition density needs s > t, got t={t}, s={s}")
    tau = float(s - t)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sx = np.where(x >= params.c, params.sigma_low, params.sigma_high)
    sy = np.where(y >= params.c, params.sigma_low, params.sigma_high)
    zx = (x - params.c) / sx
    zy = (y - params.c) / sy
    sgn = np.where(y >= params.c, 1.0, -1.0)
    norm = 1.0 / (math.sqrt(2.0 * math.pi * tau) * sy)
    direct = np.exp(-((zx - zy) ** 2) / (2.0 * tau))
    reflected = params.skew * sgn * np.exp(-((np.abs(zx) + np.abs(zy)) ** 2) / (2.0 * tau))
    return _scalar(norm * (direct + reflected))


def indicator_prob(params: ObmParams) -> float:
    """P(W_1 >= c) for the process started at 0."""
    lo, hi, c = params.sigma_low, params.sigma_high, params.c
    if c > 0:
        return float(2.0 * hi / (hi + lo) * normal_cdf(-c / hi))
    return float(1.0 - 2.0 * lo / (hi + lo) * normal_cdf(c / lo))


def integration_window(params: ObmParams, x: float = 0.0, tau: float = 1.0, width: float = 12.0):
    """Finite window outside which the density is below double precision."""
    spread = width * params.sigma_high * math.sqrt(tau)
    return min(x, params.c) - spread, max(x, params.c) + spread


def _euler_step(values, dt_sqrt, z, params):
    sig = np.where(values >= params.c, params.sigma_low, params.sigma_high)
    return values + sig * dt_sqrt * z


def sample_path(params: ObmParams, start: float, t_end: float, n_steps: int, seed: int) -> ObmPath:
    """Euler-Maruyama path with the coefficient frozen at the left endpoint.

    The normals come from the stream keyed ``(seed, 0)``; replication 0 of
    :func:`sample_endpoints` with the same arguments ends at the same point.
    """
    if n_steps < 1 or not t_end > 0:
        raise ValidationError("need n_steps >= 1 and t_end > 0")
    z = stream(seed, 0).standard_normal(n_steps)
    dt_sqrt = math.sqrt(t_end / n_steps)
    values = np.empty(n_steps + 1)
    values[0] = start
    lo, hi, c = params.sigma_low, params.sigma_high, params.c
    v = float(start)
    for i in range(n_steps):
        v += (lo if v >= c else hi) * dt_sqrt * z[i]
        values[i + 1] = v
    times = np.linspace(0.0, t_end, n_steps + 1)
    return ObmPath(times=times, values=values, seed=seed)


def sample_endpoints(
    params: ObmParams,
    reps: int,
    seed: int,
    start: float = 0.0,
    t_end: float = 1.0,
    n_steps: int | None = None,
    block: int = 4096,
    chunk: int = 512,
) -> np.ndarray:
    """Terminal values of ``reps`` independent Euler-Maruyama paths."""
    if n_steps is None:
        n_steps = max(1, int(round(OBM_STEPS_PER_UNIT * t_end)))
    dt_sqrt = math.sqrt(t_end / n_steps)
    out = np.empty(reps)
    for lo, hi in blocks(reps, block):
        streams = BlockStreams(seed, lo, hi)
        v = np.full(hi - lo, float(start))
        done = 0
        while done < n_steps:
            m = min(chunk, n_steps - done)
            z = streams.normal(m)
            for j in range(m):
                v = _euler_step(v, dt_sqrt, z[:, j], params)
            done += m
        out[lo:hi] = v
    return out
