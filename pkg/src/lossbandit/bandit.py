"""Bandit environments, Bayesian belief updating and the switching strategies.

Two belief systems are supported:

* :class:`NoLearningEnv` -- every arm has a fixed zero-mean pmf that does
  not react to history.  Individual arms are i.i.d., yet strategies that
  switch on the running sum induce non-product laws.
* :class:`TwoArmedEnv` -- outcomes in {1, 0, -1}; arm ``a`` has nonzero
  probability ``p_a`` and arm ``b`` has ``p_b``, with ``{p_a, p_b} =
  {p_low, p_high}`` and prior ``mu1 = P(p_a = p_low)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .config import TOL
from .errors import ValidationError
from .lattice import common_scale, compare_scaled, to_fraction, threshold_le

TWO_ARMED_OUTCOMES = (1, 0, -1)


@dataclass(frozen=True)
class ArmSpec:
    support: tuple
    probs: tuple
    id: str

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(to_fraction(v) for v in self.support))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        object.__setattr__(self, "id", str(self.id))

    @property
    def mean(self) -> float:
        return math.fsum(float(o) * p for o, p in zip(self.support, self.probs))

    @property
    def variance(self) -> float:
        return math.fsum(float(o) ** 2 * p for o, p in zip(self.support, self.probs))

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def pmf(self) -> dict:
        return dict(zip(self.support, self.probs))

    def to_dict(self) -> dict:
        return {"id": self.id, "support": [float(o) for o in self.support], "probs": list(self.probs)}


def symmetric_arm(half_width, arm_id: str) -> ArmSpec:
    """Fair +/- ``half_width`` coin."""
    w = to_fraction(half_width)
    return ArmSpec((w, -w), (0.5, 0.5), arm_id)


@dataclass(frozen=True)
class NoLearningEnv:
    arms: tuple

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))

    kind = "no_learning"

    @cached_property
    def scale(self) -> int:
        return common_scale(o for arm in self.arms for o in arm.support)

    @property
    def arm_ids(self) -> tuple:
        return tuple(a.id for a in self.arms)

    def arm(self, arm_id: str) -> ArmSpec:
        for a in self.arms:
            if a.id == arm_id:
                return a
        raise ValidationError(f"unknown arm {arm_id!r}")

    def lattice_support(self, arm_id: str) -> np.ndarray:
        a = self.arm(arm_id)
        return np.array([int(o * self.scale) for o in a.support], dtype=np.int64)

    @cached_property
    def variance_order(self) -> tuple:
        """Arm ids sorted by variance, then id; DP ties resolve to the first."""
        return tuple(a.id for a in sorted(self.arms, key=lambda a: (a.variance, a.id)))

    @property
    def sigma_low(self) -> float:
        return min(a.std for a in self.arms)

    @property
    def sigma_high(self) -> float:
        return max(a.std for a in self.arms)

    @property
    def high_arm(self) -> str:
        return min(self.arms, key=lambda a: (-a.variance, a.id)).id

    @property
    def low_arm(self) -> str:
        return self.variance_order[0]

    def to_dict(self) -> dict:
        return {"type": "no_learning", "arms": [a.to_dict() for a in self.arms]}


@dataclass(frozen=True)
class TwoArmedEnv:
    p_low: float
    p_high: float
    mu1: float = 0.5

    kind = "two_armed"
    arm_ids = ("a", "b")
    scale = 1

    @property
    def sigma_low(self) -> float:
        return math.sqrt(self.p_low)

    @property
    def sigma_high(self) -> float:
        return math.sqrt(self.p_high)

    @property
    def alpha(self) -> float:
        """Log-odds increment for a nonzero outcome from arm a."""
        return math.log(self.p_low / self.p_high)

    @property
    def beta(self) -> float:
        """Log-odds increment for a zero outcome from arm a."""
        return math.log((1.0 - self.p_low) / (1.0 - self.p_high))

    def prior(self) -> "BeliefState":
        return BeliefState.from_mu(self.mu1)

    def lattice_support(self, arm_id: str) -> np.ndarray:
        return np.array(TWO_ARMED_OUTCOMES, dtype=np.int64)

    def to_dict(self) -> dict:
        return {"type": "two_armed", "p_low": self.p_low, "p_high": self.p_high, "mu1": self.mu1}


def env_from_dict(d: dict):
    kind = d.get("type")
    try:
        if kind == "no_learning":
            arms = [
                ArmSpec(a["support"], a["probs"], a.get("id", f"arm{i}"))
                for i, a in enumerate(d["arms"])
            ]
            return NoLearningEnv(tuple(arms))
        if kind == "two_armed":
            return TwoArmedEnv(float(d["p_low"]), float(d["p_high"]), float(d.get("mu1", 0.5)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed environment record: {exc}") from exc
    raise ValidationError(f"unknown environment type {kind!r}")


@dataclass(frozen=True)
class EnvReport:
    sigma_low: float
    sigma_high: float
    warnings: tuple = ()

    @property
    def theta(self) -> float:
        return self.sigma_low / self.sigma_high


def validate_env(env) -> EnvReport:
    """Check zero means, full support and the variance extremes."""
    notes = []
    if isinstance(env, NoLearningEnv):
        if not env.arms:
            raise ValidationError("environment has no arms")
        ids = env.arm_ids
        if len(set(ids)) != len(ids):
            raise ValidationError(f"duplicate arm ids in {ids}")
        for a in env.arms:
            if len(a.support) != len(a.probs) or not a.support:
                raise ValidationError(f"arm {a.id}: support and probs differ in length")
            if len(set(a.support)) != len(a.support):
                raise ValidationError(f"arm {a.id}: repeated outcome")
            if any(not p > 0 for p in a.probs):
                raise ValidationError(f"arm {a.id}: zero-probability outcome (full support required)")
            if abs(math.fsum(a.probs) - 1.0) > TOL.exact:
                raise ValidationError(f"arm {a.id}: probabilities sum to {math.fsum(a.probs)!r}")
            if abs(a.mean) > TOL.exact:
                raise ValidationError(f"arm {a.id}: mean {a.mean:g} != 0")
            if a.variance <= 0:
                raise ValidationError(f"arm {a.id}: zero variance")
    elif isinstance(env, TwoArmedEnv):
        if not 0.0 < env.p_low < env.p_high < 1.0:
            raise ValidationError(f"need 0 < p_low < p_high < 1, got {env.p_low}, {env.p_high}")
        if not 0.0 <= env.mu1 <= 1.0:
            raise ValidationError(f"prior mu1 = {env.mu1} outside [0, 1]")
    else:
        raise ValidationError(f"not an environment: {env!r}")
    lo, hi = env.sigma_low, env.sigma_high
    if lo == hi:
        notes.append("sigma_low == sigma_high: trivial case, every arm is asymptotically equivalent")
    return EnvReport(sigma_low=lo, sigma_high=hi, warnings=tuple(notes))


@dataclass(frozen=True)
class BeliefState:
    """Posterior log-odds that arm a is the low-variance arm."""

    log_odds: float

    @classmethod
    def from_mu(cls, mu: float) -> "BeliefState":
        if mu <= 0.0:
            return cls(-math.inf)
        if mu >= 1.0:
            return cls(math.inf)
        return cls(math.log(mu / (1.0 - mu)))

    @property
    def mu(self) -> float:
        L = self.log_odds
        if L == math.inf:
            return 1.0
        if L == -math.inf:
            return 0.0
        if L >= 0:
            return 1.0 / (1.0 + math.exp(-L))
        e = math.exp(L)
        return e / (1.0 + e)

    def compare_half(self) -> int:
        """Sign of mu - 1/2 with a small dead zone around equality."""
        if self.log_odds > TOL.belief_tie:
            return 1
        if self.log_odds < -TOL.belief_tie:
            return -1
        return 0


def _check_outcome(outcome) -> int:
    if outcome not in TWO_ARMED_OUTCOMES:
        raise ValidationError(f"outcome {outcome!r} not in {{1, 0, -1}}")
    return int(outcome)


def posterior_update(env: TwoArmedEnv, b: BeliefState, arm: str, outcome) -> BeliefState:
    outcome = _check_outcome(outcome)
    if arm not in ("a", "b"):
        raise ValidationError(f"unknown arm {arm!r}")
    if math.isinf(b.log_odds):
        return b
    step = env.alpha if outcome != 0 else env.beta
    return BeliefState(b.log_odds + (step if arm == "a" else -step))


@dataclass(frozen=True)
class History:
    """State before the decision at ``stage`` (1-based); ``stage - 1`` outcomes seen.

    ``total`` is the running sum in lattice units of ``1 / scale``.
    ``counts`` is ``(f_a, f_b, f_a0, f_b0)`` in the two-armed model and zeros
    otherwise.
    """

    stage: int = 1
    total: int = 0
    scale: int = 1
    counts: tuple = (0, 0, 0, 0)
    belief: BeliefState | None = None

    @classmethod
    def start(cls, env) -> "History":
        belief = env.prior() if isinstance(env, TwoArmedEnv) else None
        return cls(stage=1, total=0, scale=env.scale, belief=belief)

    @property
    def cumsum(self) -> float:
        return self.total / self.scale

    @property
    def deltas(self) -> tuple:
        """Count differences (nonzero a - nonzero b, zero a - zero b) that fix the posterior."""
        fa, fb, fa0, fb0 = self.counts
        return (fa - fa0) - (fb - fb0), fa0 - fb0

    def advance(self, env, arm: str, outcome) -> "History":
        """History after pulling ``arm`` and observing ``outcome`` (payoff units)."""
        step = to_fraction(outcome) * self.scale
        if step.denominator != 1:
            raise ValidationError(f"outcome {outcome!r} is off the lattice 1/{self.scale}")
        counts, belief = self.counts, self.belief
        if isinstance(env, TwoArmedEnv):
            o = _check_outcome(int(step))
            fa, fb, fa0, fb0 = counts
            zero = o == 0
            if arm == "a":
                counts = (fa + 1, fb, fa0 + zero, fb0)
            elif arm == "b":
                counts = (fa, fb + 1, fa0, fb0 + zero)
            else:
                raise ValidationError(f"unknown arm {arm!r}")
            belief = posterior_update(env, belief, arm, o)
        return History(self.stage + 1, self.total + int(step), self.scale, counts, belief)


def _two_armed_pmf(env: TwoArmedEnv, mu: float) -> dict:
    pa = mu * env.p_low + (1.0 - mu) * env.p_high
    pb = (1.0 - mu) * env.p_low + mu * env.p_high
    return {
        "a": {1: pa / 2, 0: 1.0 - pa, -1: pa / 2},
        "b": {1: pb / 2, 0: 1.0 - pb, -1: pb / 2},
    }


def one_step_conditional(env, state: History) -> dict:
    """Predictive pmf of the next outcome for every arm, ``{arm: {outcome: prob}}``."""
    if isinstance(env, TwoArmedEnv):
        return _two_armed_pmf(env, state.belief.mu)
    return {a.id: a.pmf() for a in env.arms}


def conditional_variance(env, state: History) -> dict:
    """Conditional second moment of the next outcome for each arm."""
    return {
        arm: math.fsum(float(o) ** 2 * p for o, p in pmf.items())
        for arm, pmf in one_step_conditional(env, state).items()
    }


# ---------------------------------------------------------------------------
# strategies


STRATEGY_KINDS = ("s_star", "s_star_horizon", "s_star_learning", "single", "custom")


@dataclass(frozen=True)
class Strategy:
    kind: str
    arm: str | None = None
    horizon: int | None = None
    c: float = 0.0
    rule: Callable | None = field(default=None, compare=False, repr=False)
    name: str = ""

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValidationError(f"unknown strategy kind {self.kind!r}")
        if self.kind == "single" and self.arm is None:
            raise ValidationError("single-arm strategy needs an arm")
        if self.kind == "custom" and self.rule is None:
            raise ValidationError("custom strategy needs a rule")

    @property
    def selector(self) -> str:
        if self.kind == "single":
            return f"single:{self.arm}"
        if self.kind == "custom":
            return f"custom:{self.name}"
        return self.kind


def s_star() -> Strategy:
    """High-variance arm after cumulative losses (sum <= 0), low-variance after gains."""
    return Strategy("s_star")


def s_star_horizon(n: int, c: float = 0.0) -> Strategy:
    """Horizon-n version with reference point c: high-variance arm iff sum/sqrt(n) <= c."""
    return Strategy("s_star_horizon", horizon=int(n), c=float(c))


def s_star_learning() -> Strategy:
    return Strategy("s_star_learning")


def single_arm(arm: str) -> Strategy:
    return Strategy("single", arm=str(arm))


def custom_strategy(rule: Callable[[History], str], name: str = "rule") -> Strategy:
    return Strategy("custom", rule=rule, name=name)


def table_strategy(table: dict, default: str, name: str = "table") -> Strategy:
    """Decision table keyed by ``(stage, total)``; ``default`` elsewhere."""
    table = {(int(k[0]), int(k[1])): str(v) for k, v in table.items()}
    return custom_strategy(lambda h: table.get((h.stage, h.total), default), name)


def parse_strategy(selector: str, horizon: int | None = None, c: float = 0.0) -> Strategy:
    """Selector strings: s_star, s_star_horizon, s_star_learning, single:<arm>, custom:<file>."""
    if selector == "s_star":
        return s_star()
    if selector == "s_star_horizon":
        if horizon is None:
            raise ValidationError("s_star_horizon needs the horizon")
        return s_star_horizon(horizon, c)
    if selector == "s_star_learning":
        return s_star_learning()
    if selector.startswith("single:"):
        return single_arm(selector.split(":", 1)[1])
    if selector.startswith("custom:"):
        import json

        path = selector.split(":", 1)[1]
        try:
            with open(path) as fh:
                spec = json.load(fh)
            table = {(row[0], row[1]): row[2] for row in spec.get("table", [])}
            return table_strategy(table, spec["default"], name=path)
        except (OSError, KeyError, IndexError, ValueError) as exc:
            raise ValidationError(f"cannot load custom strategy {path!r}: {exc}") from exc
    raise ValidationError(f"unknown strategy selector {selector!r}")


def strategy_decide(s: Strategy, env, state: History, n: int | None = None) -> str:
    """Arm chosen by ``s`` at ``state``; ``n`` is the horizon for s_star_horizon."""
    if s.kind == "single":
        if s.arm not in env.arm_ids:
            raise ValidationError(f"arm {s.arm!r} not in environment")
        return s.arm
    if s.kind == "custom":
        arm = s.rule(state)
        if arm not in env.arm_ids:
            raise ValidationError(f"custom rule returned unknown arm {arm!r} at {state}")
        return arm
    if s.kind == "s_star_learning":
        if not isinstance(env, TwoArmedEnv):
            raise ValidationError("s_star_learning needs the two-armed learning environment")
        if state.stage == 1:
            return "a"
        half = state.belief.compare_half()
        if (state.total <= 0 and half < 0) or (state.total > 0 and half > 0):
            return "a"
        return "b"
    if not isinstance(env, NoLearningEnv):
        raise ValidationError(f"{s.kind} is defined for no-learning environments")
    if s.kind == "s_star":
        return env.high_arm if state.total <= 0 else env.low_arm
    horizon = s.horizon if s.horizon is not None else n
    if horizon is None:
        raise ValidationError("s_star_horizon needs the horizon")
    if compare_scaled(state.total, env.scale, horizon, s.c) <= 0:
        return env.high_arm
    return env.low_arm


def horizon_threshold(s: Strategy, env, n: int) -> int:
    """Largest lattice total at which s_star_horizon still picks the high-variance arm."""
    horizon = s.horizon if s.horizon is not None else n
    return threshold_le(env.scale, horizon, s.c)


# ---------------------------------------------------------------------------
# path probabilities in the two-armed model


def replay(env, s: Strategy, outcomes: Sequence, n: int | None = None):
    """Actions chosen along ``outcomes`` and the final history."""
    h = History.start(env)
    actions = []
    for o in outcomes:
        arm = strategy_decide(s, env, h, n)
        actions.append(arm)
        h = h.advance(env, arm, o)
    return actions, h


def frequency_vector(env: TwoArmedEnv, s: Strategy, outcomes: Sequence) -> tuple:
    """``(f_a, f_b, f_a0, f_b0)`` induced by replaying ``s`` on ``outcomes``."""
    _, h = replay(env, s, outcomes)
    return h.counts


def path_probability_from_counts(env: TwoArmedEnv, counts: tuple) -> float:
    """Two-scenario mixture given the frequency vector."""
    fa, fb, fa0, fb0 = counts
    pl, ph = env.p_low, env.p_high
    a_low = (pl / 2) ** (fa - fa0) * (ph / 2) ** (fb - fb0) * (1 - pl) ** fa0 * (1 - ph) ** fb0
    a_high = (ph / 2) ** (fa - fa0) * (pl / 2) ** (fb - fb0) * (1 - ph) ** fa0 * (1 - pl) ** fb0
    return env.mu1 * a_low + (1.0 - env.mu1) * a_high


def path_probability(env: TwoArmedEnv, s: Strategy, outcomes: Sequence) -> float:
    if not isinstance(env, TwoArmedEnv):
        raise ValidationError("path_probability is defined for the two-armed model")
    for o in outcomes:
        _check_outcome(o)
    return path_probability_from_counts(env, frequency_vector(env, s, outcomes))


def chain_probability(env, s: Strategy, outcomes: Sequence, n: int | None = None) -> float:
    """Product of one-step predictive probabilities along the path."""
    h = History.start(env)
    prob = 1.0
    for o in outcomes:
        arm = strategy_decide(s, env, h, n)
        prob *= one_step_conditional(env, h)[arm].get(to_fraction(o), 0.0)
        h = h.advance(env, arm, o)
    return prob
