"""Loss-averse utility index.

The index is assembled from a gain-domain function ``phi1`` on the
non-negative reals, a reference point ``c`` and a loss-aversion parameter
``theta`` in (0, 1]::

    phi(x) = phi1(x - c)                          x >= c
    phi(x) = -phi1(-theta * (x - c)) / theta      x <  c

With ``phi1(0) = 0`` the two branches meet at ``c`` and the derivative is
continuous there; ``theta < 1`` makes losses loom larger than gains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import TOL
from .errors import ValidationError

_GRID = np.round(np.arange(0.0, 10.0 + 1e-9, 0.01), 10)

_CUSTOM_PHI1: dict[str, Callable] = {}


@dataclass(frozen=True)
class Phi1Spec:
    """Gain-domain index phi1 with phi1(0) = 0, increasing and concave.

    ``func`` must accept numpy arrays of non-negative reals.
    ``derivative_bound`` is a declared bound on the first three derivatives;
    it is recorded, never verified.
    """

    func: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    kind: str = "exponential"
    name: str = "exponential"
    derivative_bound: float | None = 1.0

    def __call__(self, x):
        return self.func(x)

    @property
    def label(self) -> str:
        return "exponential" if self.kind == "exponential" else f"custom:{self.name}"


def _exp_phi1(x):
    return -np.expm1(-np.asarray(x, dtype=float))


def exponential_phi1() -> Phi1Spec:
    """phi1(x) = 1 - exp(-x)."""
    return Phi1Spec(func=_exp_phi1, kind="exponential", name="exponential", derivative_bound=1.0)


def custom_phi1(name: str, func: Callable, derivative_bound: float | None = None) -> Phi1Spec:
    """Wrap a user callable and register it under ``name`` for JSON round trips."""
    _CUSTOM_PHI1[name] = (func, derivative_bound)
    return Phi1Spec(func=func, kind="custom", name=name, derivative_bound=derivative_bound)


def phi1_from_label(label: str) -> Phi1Spec:
    if label == "exponential":
        return exponential_phi1()
    if label.startswith("custom:"):
        name = label.split(":", 1)[1]
        if name not in _CUSTOM_PHI1:
            raise ValidationError(f"no custom phi1 registered under {name!r}")
        func, bound = _CUSTOM_PHI1[name]
        return Phi1Spec(func=func, kind="custom", name=name, derivative_bound=bound)
    raise ValidationError(f"unknown phi1 {label!r}")


def validate_phi1(phi1: Phi1Spec, grid: np.ndarray = _GRID) -> None:
    """Grid check of phi1(0) = 0, strict monotonicity and concavity.

    A heuristic: it catches sign errors and obvious misspecification, it
    does not prove the smoothness conditions.
    """
    at0 = float(np.asarray(phi1(np.array([0.0])))[0])
    if abs(at0) > TOL.phi1_zero:
        raise ValidationError(f"phi1(0) = {at0!r}, expected 0")
    vals = np.asarray(phi1(grid), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValidationError("phi1 is not finite on the validation grid")
    d1 = np.diff(vals)
    if np.any(d1 <= 0):
        x = grid[int(np.argmax(d1 <= 0))]
        raise ValidationError(f"phi1 is not strictly increasing near x = {x:g}")
    d2 = np.diff(vals, 2)
    # allow rounding noise in second differences
    slack = 64 * np.finfo(float).eps * np.maximum(1.0, np.abs(vals[1:-1]))
    if np.any(d2 > slack):
        x = grid[1 + int(np.argmax(d2 > slack))]
        raise ValidationError(f"phi1 is not concave near x = {x:g}")


@dataclass(frozen=True)
class UtilityIndex:
    phi1: Phi1Spec
    c: float
    theta: float

    def __call__(self, x):
        return eval_utility(self, x)

    def to_dict(self) -> dict:
        return {"phi1": self.phi1.label, "c": float(self.c), "theta": float(self.theta)}

    @classmethod
    def from_dict(cls, d: dict) -> "UtilityIndex":
        try:
            label, c, theta = d["phi1"], float(d["c"]), float(d["theta"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed utility record: {d!r}") from exc
        return make_utility(phi1_from_label(label), c, theta)


def make_utility(phi1: Phi1Spec, c: float, theta: float) -> UtilityIndex:
    theta = float(theta)
    if not (0.0 < theta <= 1.0) or not np.isfinite(theta):
        raise ValidationError(f"theta must lie in (0, 1], got {theta!r}")
    if not np.isfinite(c):
        raise ValidationError("reference point c must be finite")
    validate_phi1(phi1)
    return UtilityIndex(phi1=phi1, c=float(c), theta=theta)


def exponential_utility(c: float = 0.0, theta: float = 0.5) -> UtilityIndex:
    return make_utility(exponential_phi1(), c, theta)


def eval_utility(u: UtilityIndex, x):
    """phi(x); scalar in, float out, array in, array out."""
    arr = np.asarray(x, dtype=float)
    z = arr - u.c
    out = np.empty_like(z)
    gain = z >= 0
    out[gain] = u.phi1(z[gain])
    loss = ~gain
    out[loss] = -u.phi1(-u.theta * z[loss]) / u.theta
    if out.ndim == 0:
        return float(out)
    return out


def _loss_aversion_grid():
    xs = np.linspace(0.01, 5.0, 50)
    ps = np.linspace(0.05, 0.95, 19)
    return np.meshgrid(xs, ps, indexing="ij")


def loss_aversion_measure(u: UtilityIndex) -> float:
    """Behavioral loss-aversion measure ``1/theta - 1``.

    Self-checks that with ``lam = 1/theta`` the zero-mean lottery paying
    ``x`` with weight ``lam * p`` and ``-lam * x`` with weight ``p`` is
    indifferent to the reference point, and the dual form with
    ``alpha = theta``.  A failure means ``phi1`` is not behaving as a
    function of one variable should (e.g. a stateful callable).
    """
    lam = 1.0 / u.theta
    x, p = _loss_aversion_grid()
    lhs = lam * p * eval_utility(u, u.c + x) + p * eval_utility(u, u.c - lam * x)
    alpha = u.theta
    dual = p * eval_utility(u, u.c + alpha * x) + alpha * p * eval_utility(u, u.c - x)
    worst = max(float(np.max(np.abs(lhs))), float(np.max(np.abs(dual))))
    if worst > TOL.identity:
        raise ValidationError(f"indifference identity violated by {worst:.3e}")
    return lam - 1.0
