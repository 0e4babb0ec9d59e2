"""Exact finite-horizon values by backward induction.

The set of laws induced by all strategies is rectangular: it is closed
under pasting one-step conditionals, so the upper expectation of a
terminal payoff is computed stage by stage as a maximum over arms of a
conditional expectation.  States are lattice values of the running sum
(plus, in the two-armed model, the two count differences that fix the
posterior).

Layers are indexed by ``k``, the number of outcomes already observed; the
decision stored in layer ``k`` is the action taken at stage ``k + 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _learning_kernels as lk
from .bandit import (
    BeliefState,
    History,
    NoLearningEnv,
    Strategy,
    TwoArmedEnv,
    horizon_threshold,
    one_step_conditional,
    strategy_decide,
    validate_env,
)
from .config import MAX_STATES, TOL
from .errors import CouplingWarning, StateSpaceError, ValidationError
from .lattice import on_boundary, threshold_ge
from .utility import UtilityIndex, eval_utility

# keep per-stage layers automatically below this many stored cells
_AUTO_KEEP_CELLS = 20_000_000


@dataclass
class DpTable:
    """Value layers and argmax decisions of one backward induction.

    For a no-learning environment layer ``k`` is a 1-D array over lattice
    totals ``k * lo, ..., k * hi``.  For the two-armed model it is the
    compact 3-D array described in :mod:`lossbandit._learning_kernels`.
    ``layers``/``argmax`` are ``None`` unless the table was kept.
    """

    horizon: int
    value: float
    kind: str
    arm_ids: tuple
    scale: int
    lo: int = 0
    hi: int = 0
    layers: list | None = None
    argmax: list | None = None
    meta: dict = field(default_factory=dict)

    @property
    def kept(self) -> bool:
        return self.layers is not None

    def _require(self):
        if not self.kept:
            raise ValidationError("table layers were not kept; rerun with keep_layers=True")

    def _index(self, k, total, d1, d2):
        if self.kind == "no_learning":
            j = total - k * self.lo
            if not 0 <= j <= k * (self.hi - self.lo):
                raise IndexError(f"total {total} unreachable at layer {k}")
            return (j,)
        if max(abs(total), abs(d1)) + abs(d2) > k or (total - d1) % 2 or (total + d2 - k) % 2:
            raise IndexError(f"state {(total, d1, d2)} unreachable at layer {k}")
        return (total + k, (d1 + k) >> 1, (d2 + k) >> 1)

    def value_at(self, k: int, total: int, d1: int = 0, d2: int = 0) -> float:
        self._require()
        return float(self.layers[k][self._index(k, total, d1, d2)])

    def argmax_at(self, k: int, total: int, d1: int = 0, d2: int = 0) -> str:
        self._require()
        if k >= self.horizon:
            raise IndexError("terminal layer has no decision")
        return self.arm_ids[int(self.argmax[k][self._index(k, total, d1, d2)])]

    def rows(self):
        """``(stage, sum, d1, d2, value, argmax)`` for every reachable state."""
        self._require()
        for k, layer in enumerate(self.layers):
            arg = self.argmax[k] if k < self.horizon else None
            if self.kind == "no_learning":
                for j, v in enumerate(layer):
                    total = k * self.lo + j
                    a = self.arm_ids[int(arg[j])] if arg is not None else ""
                    yield k + 1, total / self.scale, 0, 0, float(v), a
                continue
            for s in range(-k, k + 1):
                for d1 in range(-k, k + 1):
                    if (s - d1) % 2:
                        continue
                    for d2 in range(-k, k + 1):
                        if max(abs(s), abs(d1)) + abs(d2) > k or (s + d2 - k) % 2:
                            continue
                        idx = (s + k, (d1 + k) >> 1, (d2 + k) >> 1)
                        a = self.arm_ids[int(arg[idx])] if arg is not None else ""
                        yield k + 1, s, d1, d2, float(layer[idx]), a


# ---------------------------------------------------------------------------
# helpers


def _coupling_note(env, u: UtilityIndex):
    theta = env.sigma_low / env.sigma_high
    if abs(theta - u.theta) > 1e-9:
        warnings.warn(
            f"utility theta {u.theta:g} != sigma_low/sigma_high {theta:g}; finite-n values are"
            " exact but the limit theory assumes equality",
            CouplingWarning,
            stacklevel=3,
        )


def _check_states(env, n: int, max_states: int):
    if n < 1:
        raise ValidationError("horizon must be >= 1")
    if isinstance(env, NoLearningEnv):
        lo, hi = _nl_bounds(env)
        peak = n * (hi - lo) + 1
    else:
        peak = (2 * n + 1) * (n + 1) ** 2
    if peak > max_states:
        raise StateSpaceError(f"layer of {peak} states exceeds the cap {max_states}")
    return peak


def _auto_keep(env, n: int, keep_layers):
    if keep_layers is not None:
        return keep_layers
    if isinstance(env, NoLearningEnv):
        lo, hi = _nl_bounds(env)
        cells = (n + 1) * (n * (hi - lo) + 2) // 2
    else:
        cells = sum((2 * m + 1) * (m + 1) ** 2 for m in range(n + 1))
    return cells <= _AUTO_KEEP_CELLS


def _nl_bounds(env: NoLearningEnv):
    supports = [env.lattice_support(a) for a in env.arm_ids]
    return int(min(s.min() for s in supports)), int(max(s.max() for s in supports))


def _nl_arms(env: NoLearningEnv):
    """(id, lattice outcomes, probs) in variance order."""
    return [
        (a, env.lattice_support(a), np.array(env.arm(a).probs)) for a in env.variance_order
    ]


def _terminal_totals(env, n):
    if isinstance(env, NoLearningEnv):
        lo, hi = _nl_bounds(env)
        return np.arange(n * lo, n * hi + 1)
    return np.arange(-n, n + 1)


def utility_terminal(u: UtilityIndex, scaling: str = "sqrt") -> Callable:
    """Terminal payoff ``phi(total / (scale * sqrt(n)))`` as a function of lattice totals."""

    def f(totals, scale, n):
        denom = scale * (math.sqrt(n) if scaling == "sqrt" else n)
        return eval_utility(u, np.asarray(totals, dtype=float) / denom)

    return f


def indicator_terminal(c) -> Callable:
    """Terminal payoff ``1{total / (scale * sqrt(n)) >= c}`` with exact comparison."""

    def f(totals, scale, n):
        return (np.asarray(totals) >= threshold_ge(scale, n, c)).astype(float)

    return f


# ---------------------------------------------------------------------------
# no-learning sweeps


def _nl_expectations(arms, nxt, size, lo):
    out = np.zeros((len(arms), size))
    for i, (_, outs, probs) in enumerate(arms):
        for o, p in zip(outs, probs):
            start = int(o) - lo
            out[i] += p * nxt[start : start + size]
    return out


def _nl_decisions(env: NoLearningEnv, s: Strategy, k: int, totals: np.ndarray, n: int, ids: list):
    """Arm index (into ``ids``) chosen at every state of layer ``k``."""
    if s.kind == "single":
        if s.arm not in ids:
            raise ValidationError(f"arm {s.arm!r} not in environment")
        return np.full(totals.shape, ids.index(s.arm))
    hi_i, lo_i = ids.index(env.high_arm), ids.index(env.low_arm)
    if s.kind == "s_star":
        return np.where(totals <= 0, hi_i, lo_i)
    if s.kind == "s_star_horizon":
        t = horizon_threshold(s, env, n)
        return np.where(totals <= t, hi_i, lo_i)
    if s.kind == "custom":
        return np.array(
            [ids.index(strategy_decide(s, env, History(k + 1, int(t), env.scale), n)) for t in totals]
        )
    raise ValidationError(f"strategy {s.kind} is not defined for no-learning environments")


def _nl_backward(env: NoLearningEnv, n: int, terminal, from_k: int, keep: bool):
    """Optimal backward induction from layer ``from_k`` (given values) down to layer 0."""
    arms = _nl_arms(env)
    lo, hi = _nl_bounds(env)
    v = np.asarray(terminal, dtype=float)
    layers = [v] if keep else None
    args = [] if keep else None
    for k in range(from_k - 1, -1, -1):
        size = k * (hi - lo) + 1
        e = _nl_expectations(arms, v, size, lo)
        arg = np.argmax(e, axis=0)  # first maximum: lowest variance
        v = e[arg, np.arange(size)]
        if keep:
            layers.append(v)
            args.append(arg.astype(np.int8))
    if keep:
        layers.reverse()
        args.reverse()
    ids = tuple(a for a, _, _ in arms)
    return float(v[0]), layers, args, ids


def _nl_forward(env: NoLearningEnv, s: Strategy, n: int):
    """Distribution of the terminal lattice total under strategy ``s``."""
    lo, hi = _nl_bounds(env)
    ids = list(env.arm_ids)
    supports = [env.lattice_support(a) for a in ids]
    probs = [np.array(env.arm(a).probs) for a in ids]
    mass = np.ones(1)
    for k in range(n):
        totals = np.arange(k * lo, k * hi + 1)
        choice = _nl_decisions(env, s, k, totals, n, ids)
        size = (k + 1) * (hi - lo) + 1
        nxt = np.zeros(size)
        for i in range(len(ids)):
            w = np.where(choice == i, mass, 0.0)
            if not w.any():
                continue
            for o, p in zip(supports[i], probs[i]):
                start = int(o) - lo
                nxt[start : start + mass.size] += p * w
        mass = nxt
    return np.arange(n * lo, n * hi + 1), mass


# ---------------------------------------------------------------------------
# two-armed sweeps


def _learning_params(env: TwoArmedEnv):
    L1 = env.prior().log_odds
    return L1, env.alpha, env.beta, env.p_low, env.p_high, TOL.belief_tie


def _learning_code(s: Strategy | None):
    if s is None:
        return lk.OPTIMAL
    if s.kind == "s_star_learning":
        return lk.LEARNING_RULE
    if s.kind == "single":
        if s.arm not in ("a", "b"):
            raise ValidationError(f"arm {s.arm!r} not in environment")
        return lk.ALWAYS_A if s.arm == "a" else lk.ALWAYS_B
    return None


def _lr_backward(env: TwoArmedEnv, n: int, terminal_layer, from_k: int, keep: bool, code=lk.OPTIMAL):
    params = _learning_params(env)
    nxt = terminal_layer
    layers = [nxt] if keep else None
    args = [] if keep else None
    for m in range(from_k - 1, -1, -1):
        val = np.zeros(lk.layer_shape(m))
        arg = np.zeros(lk.layer_shape(m), dtype=np.int8)
        lk.backward_layer(m, nxt, code, *params, val, arg)
        nxt = val
        if keep:
            layers.append(val)
            args.append(arg)
    if keep:
        layers.reverse()
        args.reverse()
    return float(nxt[0, 0, 0]), layers, args


def _lr_forward(env: TwoArmedEnv, code: int, n: int):
    """Mass over terminal running sums -n..n under a compiled strategy code."""
    params = _learning_params(env)
    cur = np.ones((1, 1, 1))
    for m in range(n):
        nxt = np.zeros(lk.layer_shape(m + 1))
        lk.forward_layer(m, cur, code, *params, nxt)
        cur = nxt
    # collapse onto the running sum; unreachable cells hold zero mass
    return np.arange(-n, n + 1), cur.sum(axis=(1, 2))


def _history_for(env: TwoArmedEnv, m: int, s: int, d1: int, d2: int) -> History:
    """A canonical history with the given lattice state (fewest nonzero outcomes)."""
    nz = max(abs(s), abs(d1))
    z = m - nz
    fa_nz, fb_nz = (nz + d1) // 2, (nz - d1) // 2
    fa0, fb0 = (z + d2) // 2, (z - d2) // 2
    L = env.prior().log_odds
    if not math.isinf(L):
        L = L + d1 * env.alpha + d2 * env.beta
    return History(m + 1, s, 1, (fa_nz + fa0, fb_nz + fb0, fa0, fb0), BeliefState(L))


def _lr_forward_custom(env: TwoArmedEnv, s: Strategy, n: int):
    """Pure-Python forward pass for arbitrary strategies of the lattice state."""
    mass = {(0, 0, 0): 1.0}
    for m in range(n):
        nxt = {}
        for (tot, d1, d2), w in mass.items():
            h = _history_for(env, m, tot, d1, d2)
            arm = strategy_decide(s, env, h, n)
            pmf = one_step_conditional(env, h)[arm]
            sign = 1 if arm == "a" else -1
            for o, p in pmf.items():
                key = (tot + o, d1 + sign, d2) if o != 0 else (tot, d1, d2 + sign)
                nxt[key] = nxt.get(key, 0.0) + w * p
        mass = nxt
    totals = np.arange(-n, n + 1)
    out = np.zeros(totals.size)
    for (tot, _, _), w in mass.items():
        out[tot + n] += w
    return totals, out


# ---------------------------------------------------------------------------
# public operations


def optimal_value(env, terminal: Callable, n: int, keep_layers: bool | None = None, max_states: int = MAX_STATES) -> DpTable:
    """Upper expectation of a terminal payoff of the lattice total over all strategies."""
    validate_env(env)
    _check_states(env, n, max_states)
    keep = _auto_keep(env, n, keep_layers)
    totals = _terminal_totals(env, n)
    term = terminal(totals, env.scale, n)
    if isinstance(env, NoLearningEnv):
        lo, hi = _nl_bounds(env)
        v, layers, args, ids = _nl_backward(env, n, term, n, keep)
        return DpTable(n, v, "no_learning", ids, env.scale, lo, hi, layers, args)
    v, layers, args = _lr_backward(env, n, lk.terminal_layer(n, term), n, keep)
    return DpTable(n, v, "two_armed", ("a", "b"), 1, -1, 1, layers, args)


def value_n(env, u: UtilityIndex, n: int, keep_layers: bool | None = None, max_states: int = MAX_STATES):
    """``(V_n, table)``: the optimal expected utility of ``phi(S_n / sqrt(n))``."""
    _coupling_note(env, u)
    table = optimal_value(env, utility_terminal(u), n, keep_layers, max_states)
    return table.value, table


def value_from_layer(env, layer, m: int, keep_layers: bool = False) -> DpTable:
    """Backward induction over the first ``m`` stages with ``layer`` as terminal values."""
    if isinstance(env, NoLearningEnv):
        lo, hi = _nl_bounds(env)
        v, layers, args, ids = _nl_backward(env, m, layer, m, keep_layers)
        return DpTable(m, v, "no_learning", ids, env.scale, lo, hi, layers, args)
    v, layers, args = _lr_backward(env, m, layer, m, keep_layers)
    return DpTable(m, v, "two_armed", ("a", "b"), 1, -1, 1, layers, args)


def terminal_distribution(env, s: Strategy, n: int, max_states: int = MAX_STATES):
    """``(totals, probs)``: law of the lattice total after ``n`` stages under ``s``."""
    validate_env(env)
    _check_states(env, n, max_states)
    if isinstance(env, NoLearningEnv):
        return _nl_forward(env, s, n)
    code = _learning_code(s)
    if code is None:
        return _lr_forward_custom(env, s, n)
    return _lr_forward(env, code, n)


def strategy_value_n(env, s: Strategy, u: UtilityIndex, n: int, scaling: str = "sqrt", max_states: int = MAX_STATES) -> float:
    """Exact expected utility of strategy ``s`` by forward propagation of its law."""
    totals, probs = terminal_distribution(env, s, n, max_states)
    payoff = utility_terminal(u, scaling)(totals, env.scale, n)
    return float(np.dot(probs, payoff))


def strategy_indicator_prob_n(env, s: Strategy, c, n: int) -> float:
    totals, probs = terminal_distribution(env, s, n)
    return float(np.dot(probs, indicator_terminal(c)(totals, env.scale, n)))


def upper_indicator_prob_n(env, c, n: int, max_states: int = MAX_STATES) -> float:
    """``sup_s P^s(S_n / sqrt(n) >= c)`` with an inclusive, exactly evaluated boundary."""
    return optimal_value(env, indicator_terminal(c), n, keep_layers=False, max_states=max_states).value


def parity_averaged_indicator(env, c, n: int) -> dict:
    """Indicator upper probability at ``n`` and ``n + 1`` and their mean.

    Lattice atoms on the boundary make the sequence oscillate with the
    parity of ``n``; the average removes the leading oscillation.
    """
    p0 = upper_indicator_prob_n(env, c, n)
    p1 = upper_indicator_prob_n(env, c, n + 1)
    return {
        "n": n,
        "p_n": p0,
        "p_n_plus_1": p1,
        "average": 0.5 * (p0 + p1),
        "atoms_at_boundary": [on_boundary(env.scale, n, c), on_boundary(env.scale, n + 1, c)],
    }


def rect_identity_check(h: Callable[[float], float], state: History, env: NoLearningEnv):
    """Largest conditional ``h(sum) * E[X^2]`` over arms versus the positive/negative-part formula."""
    if not isinstance(env, NoLearningEnv):
        raise ValidationError("rect_identity_check needs a no-learning environment")
    hv = float(h(state.cumsum))
    lhs = max(
        hv * math.fsum(float(o) ** 2 * p for o, p in zip(a.support, a.probs)) for a in env.arms
    )
    rhs = env.sigma_high**2 * max(hv, 0.0) - env.sigma_low**2 * max(-hv, 0.0)
    return lhs, rhs
