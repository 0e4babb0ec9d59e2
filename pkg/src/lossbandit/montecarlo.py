"""Monte Carlo simulation of strategies under their induced laws.

Replications are simulated in blocks, vectorized across the block, with
one counter-based stream per replication (see :mod:`lossbandit.rng`).  A
replication therefore produces the same path regardless of block size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .bandit import (
    History,
    NoLearningEnv,
    Strategy,
    TwoArmedEnv,
    BeliefState,
    horizon_threshold,
    strategy_decide,
    validate_env,
)
from .config import DEFAULT_REPS, TOL
from .errors import ValidationError
from .rng import BlockStreams, blocks
from .utility import UtilityIndex, eval_utility, exponential_utility

_CLASSES = ("high", "low", "other")


@dataclass
class SimReport:
    reps: int
    n: int
    strategy: str
    scaling: str
    seed: int
    value_estimate: float
    std_error: float
    pull_frequency: dict
    final_pull_frequency: dict
    persistence_window: tuple | None = None
    persistence_le: float | None = None
    persistence_gt: float | None = None
    indicator_frequency: float | None = None
    posterior_histogram: list | None = None
    posterior_certain_fraction: float | None = None
    per_rep: dict | None = field(default=None, repr=False)

    @property
    def final_ratio(self) -> float:
        """Stage-n high/low pull ratio."""
        lo = self.final_pull_frequency["low"]
        return self.final_pull_frequency["high"] / lo if lo > 0 else math.inf

    def to_dict(self) -> dict:
        d = {
            "reps": self.reps,
            "n": self.n,
            "strategy": self.strategy,
            "scaling": self.scaling,
            "seed": self.seed,
            "value_estimate": self.value_estimate,
            "std_error": self.std_error,
            "pull_frequency": self.pull_frequency,
            "final_pull_frequency": self.final_pull_frequency,
            "indicator_frequency": self.indicator_frequency,
        }
        if self.persistence_window is not None:
            d["persistence_window"] = list(self.persistence_window)
            d["persistence_le"] = self.persistence_le
            d["persistence_gt"] = self.persistence_gt
        if self.posterior_histogram is not None:
            d["posterior_histogram"] = self.posterior_histogram
            d["posterior_certain_fraction"] = self.posterior_certain_fraction
        return d


@dataclass(frozen=True)
class PosteriorReport:
    n: int
    reps: int
    truth: str
    consistent_fraction: float
    certain_fraction: float
    degenerate_prior: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


# ---------------------------------------------------------------------------
# per-environment pieces


class _NoLearningSim:
    def __init__(self, env: NoLearningEnv, s: Strategy, n: int):
        self.env, self.s, self.n = env, s, n
        self.ids = list(env.arm_ids)
        self.supports = [env.lattice_support(a) for a in self.ids]
        width = max(len(x) for x in self.supports)
        self.outcomes = np.zeros((len(self.ids), width), dtype=np.int64)
        self.cum = np.full((len(self.ids), width), np.inf)
        for i, a in enumerate(self.ids):
            k = len(self.supports[i])
            self.outcomes[i, :k] = self.supports[i]
            self.cum[i, : k - 1] = np.cumsum(env.arm(a).probs)[:-1]
        var = np.array([env.arm(a).variance for a in self.ids])
        self.cls = np.where(var == var.max(), 0, np.where(var == var.min(), 1, 2))
        if var.max() == var.min():
            self.cls[:] = 1
        self.hi_i = self.ids.index(env.high_arm)
        self.lo_i = self.ids.index(env.low_arm)
        if s.kind == "s_star_horizon":
            self.threshold = horizon_threshold(s, env, n)
        if s.kind == "single" and s.arm not in self.ids:
            raise ValidationError(f"arm {s.arm!r} not in environment")
        if s.kind == "s_star_learning":
            raise ValidationError("s_star_learning needs the two-armed learning environment")

    def start(self, rows):
        return {"total": np.zeros(rows, dtype=np.int64)}

    def decide(self, st, k):
        total = st["total"]
        s = self.s
        if s.kind == "s_star":
            return np.where(total <= 0, self.hi_i, self.lo_i)
        if s.kind == "s_star_horizon":
            return np.where(total <= self.threshold, self.hi_i, self.lo_i)
        if s.kind == "single":
            return np.full(total.shape, self.ids.index(s.arm))
        return np.array(
            [
                self.ids.index(strategy_decide(s, self.env, History(k + 1, int(t), self.env.scale), self.n))
                for t in total
            ]
        )

    def classify(self, st, arm):
        return self.cls[arm]

    def step(self, st, arm, u):
        j = (u[:, None] >= self.cum[arm]).sum(axis=1)
        st["total"] = st["total"] + self.outcomes[arm, j]


class _TwoArmedSim:
    """Predictive draws under P^s, or fixed-arm draws under the truth Q^s."""

    def __init__(self, env: TwoArmedEnv, s: Strategy, n: int, truth: str | None = None):
        self.env, self.s, self.n, self.truth = env, s, n, truth
        if s.kind in ("s_star", "s_star_horizon"):
            raise ValidationError(f"{s.kind} is defined for no-learning environments")
        if s.kind == "single" and s.arm not in ("a", "b"):
            raise ValidationError(f"arm {s.arm!r} not in environment")
        self.alpha, self.beta = env.alpha, env.beta

    def start(self, rows):
        L0 = self.env.prior().log_odds
        return {
            "total": np.zeros(rows, dtype=np.int64),
            "L": np.full(rows, L0),
            "counts": np.zeros((rows, 4), dtype=np.int64),
        }

    def _pnz(self, L):
        mu = expit(L)
        pa = mu * self.env.p_low + (1 - mu) * self.env.p_high
        pb = (1 - mu) * self.env.p_low + mu * self.env.p_high
        return pa, pb

    def decide(self, st, k):
        s = self.s
        total, L = st["total"], st["L"]
        if s.kind == "single":
            return np.full(total.shape, 0 if s.arm == "a" else 1)
        if s.kind == "s_star_learning":
            if k == 0:
                return np.zeros(total.shape, dtype=np.int64)
            tie = TOL.belief_tie
            use_a = ((total <= 0) & (L < -tie)) | ((total > 0) & (L > tie))
            return np.where(use_a, 0, 1)
        out = np.empty(total.shape, dtype=np.int64)
        for r in range(total.size):
            fa, fb, fa0, fb0 = (int(x) for x in st["counts"][r])
            h = History(k + 1, int(total[r]), 1, (fa, fb, fa0, fb0), BeliefState(float(L[r])))
            out[r] = 0 if strategy_decide(s, self.env, h, self.n) == "a" else 1
        return out

    def classify(self, st, arm):
        pa, pb = self._pnz(st["L"])
        mine = np.where(arm == 0, pa, pb)
        other = np.where(arm == 0, pb, pa)
        return np.where(mine > other, 0, np.where(mine < other, 1, 2))

    def step(self, st, arm, u):
        if self.truth is None:
            pa, pb = self._pnz(st["L"])
            p = np.where(arm == 0, pa, pb)
        else:
            p_a = self.env.p_low if self.truth == "a" else self.env.p_high
            p_b = self.env.p_high if self.truth == "a" else self.env.p_low
            p = np.where(arm == 0, p_a, p_b)
        o = np.where(u < 0.5 * p, 1, np.where(u < p, -1, 0))
        st["total"] = st["total"] + o
        nz = o != 0
        sign = np.where(arm == 0, 1.0, -1.0)
        st["L"] = st["L"] + sign * np.where(nz, self.alpha, self.beta)
        c = st["counts"]
        c[:, 0] += arm == 0
        c[:, 1] += arm == 1
        c[:, 2] += (arm == 0) & ~nz
        c[:, 3] += (arm == 1) & ~nz


# ---------------------------------------------------------------------------


def _simulate(env, s, n, reps, seed, *, u, scaling, persistence_N, truth=None, block=4096, chunk=1024):
    validate_env(env)
    if reps < 1 or n < 1:
        raise ValidationError("need reps >= 1 and n >= 1")
    if scaling not in ("sqrt", "linear"):
        raise ValidationError(f"scaling must be 'sqrt' or 'linear', got {scaling!r}")
    if isinstance(env, NoLearningEnv):
        sim = _NoLearningSim(env, s, n)
    else:
        sim = _TwoArmedSim(env, s, n, truth)
    finals = np.empty(reps, dtype=np.int64)
    logodds = np.empty(reps) if isinstance(env, TwoArmedEnv) else None
    pulls = np.zeros(3, dtype=np.int64)
    final_pulls = np.zeros(3, dtype=np.int64)
    le_all = np.empty(reps, dtype=bool)
    gt_all = np.empty(reps, dtype=bool)
    for r0, r1 in blocks(reps, block):
        streams = BlockStreams(seed, r0, r1)
        st = sim.start(r1 - r0)
        le = np.ones(r1 - r0, dtype=bool)
        gt = np.ones(r1 - r0, dtype=bool)
        k = 0
        while k < n:
            m = min(chunk, n - k)
            U = streams.uniform(m)
            for j in range(m):
                arm = sim.decide(st, k)
                cls = sim.classify(st, arm)
                pulls += np.bincount(cls, minlength=3)
                if k == n - 1:
                    final_pulls += np.bincount(cls, minlength=3)
                sim.step(st, arm, U[:, j])
                k += 1
                if persistence_N is not None and k >= persistence_N:
                    le &= st["total"] <= 0
                    gt &= st["total"] > 0
        finals[r0:r1] = st["total"]
        le_all[r0:r1] = le
        gt_all[r0:r1] = gt
        if logodds is not None:
            logodds[r0:r1] = st["L"]
    denom = env.scale * (math.sqrt(n) if scaling == "sqrt" else n)
    values = np.asarray(eval_utility(u, finals / denom), dtype=float)
    return finals, values, logodds, pulls, final_pulls, le_all, gt_all


def _freq(counts):
    total = counts.sum()
    return {name: float(c / total) for name, c in zip(_CLASSES, counts)}


def default_utility(env) -> UtilityIndex:
    """Exponential index with c = 0 and theta = sigma_low / sigma_high."""
    return exponential_utility(0.0, env.sigma_low / env.sigma_high)


def simulate_paths(
    env,
    s: Strategy,
    n: int,
    reps: int = DEFAULT_REPS,
    seed: int = 0,
    scaling: str = "sqrt",
    u: UtilityIndex | None = None,
    persistence_N: int | None = None,
    indicator_c: float = 0.0,
    keep_reps: bool = False,
    block: int = 4096,
) -> SimReport:
    """Estimate ``E[phi(S_n / sqrt(n))]`` (or ``S_n / n``) under the law induced by ``s``."""
    u = default_utility(env) if u is None else u
    finals, values, logodds, pulls, final_pulls, le, gt = _simulate(
        env, s, n, reps, seed, u=u, scaling=scaling, persistence_N=persistence_N, block=block
    )
    std = float(values.std(ddof=1)) if reps > 1 else 0.0
    # indicator of S_n / sqrt(n) >= c, floating comparison is fine away from atoms
    ind = float(np.mean(finals / (env.scale * math.sqrt(n)) >= indicator_c))
    report = SimReport(
        reps=reps,
        n=n,
        strategy=s.selector,
        scaling=scaling,
        seed=seed,
        value_estimate=float(values.mean()),
        std_error=std / math.sqrt(reps),
        pull_frequency=_freq(pulls),
        final_pull_frequency=_freq(final_pulls),
        indicator_frequency=ind,
    )
    if persistence_N is not None:
        report.persistence_window = (int(persistence_N), n)
        report.persistence_le = float(le.mean())
        report.persistence_gt = float(gt.mean())
    if logodds is not None:
        mu = expit(logodds)
        hist, _ = np.histogram(mu, bins=10, range=(0.0, 1.0))
        report.posterior_histogram = hist.tolist()
        report.posterior_certain_fraction = float(np.mean(np.minimum(mu, 1 - mu) < 0.01))
    if keep_reps:
        report.per_rep = {"final_sum": finals / env.scale, "value": values}
        if logodds is not None:
            report.per_rep["mu_n"] = expit(logodds)
    return report


def posterior_consistency(
    env: TwoArmedEnv,
    truth: str,
    s: Strategy,
    n: int,
    reps: int,
    seed: int = 0,
    threshold: float = 0.99,
) -> PosteriorReport:
    """Fraction of paths whose posterior has settled on the truth, and on certainty.

    ``truth`` names the arm that really has the low nonzero probability.
    Under the true law the consistent fraction counts ``mu_n > threshold``
    (truth ``a``) or ``mu_n < 1 - threshold`` (truth ``b``).  Under the
    subjective law the certain fraction counts ``min(mu_n, 1 - mu_n) <
    1 - threshold``.
    """
    if not isinstance(env, TwoArmedEnv):
        raise ValidationError("posterior consistency needs the two-armed model")
    if truth not in ("a", "b"):
        raise ValidationError("truth must be 'a' or 'b'")
    u = default_utility(env)
    _, _, L_true, *_ = _simulate(env, s, n, reps, seed, u=u, scaling="sqrt", persistence_N=None, truth=truth)
    _, _, L_subj, *_ = _simulate(env, s, n, reps, seed, u=u, scaling="sqrt", persistence_N=None)
    mu_true, mu_subj = expit(L_true), expit(L_subj)
    eps = 1.0 - threshold
    consistent = mu_true > threshold if truth == "a" else mu_true < eps
    degenerate = env.mu1 in (0.0, 1.0)
    note = ""
    if (truth == "a" and env.mu1 == 0.0) or (truth == "b" and env.mu1 == 1.0):
        note = "prior rules out the truth; the posterior cannot move"
    return PosteriorReport(
        n=n,
        reps=reps,
        truth=truth,
        consistent_fraction=float(np.mean(consistent)),
        certain_fraction=float(np.mean(np.minimum(mu_subj, 1 - mu_subj) < eps)),
        degenerate_prior=degenerate,
        note=note,
    )
