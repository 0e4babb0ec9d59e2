import math

import numpy as np
import pytest
from scipy import stats

from lossbandit import (
    NoLearningEnv,
    TwoArmedEnv,
    ValidationError,
    custom_strategy,
    exponential_utility,
    posterior_consistency,
    s_star,
    s_star_horizon,
    s_star_learning,
    simulate_paths,
    single_arm,
    strategy_value_n,
    symmetric_arm,
)
from lossbandit.rng import stream


def test_reproducible(ref_env, u_ref):
    a = simulate_paths(ref_env, s_star(), 40, 3000, seed=9, u=u_ref, persistence_N=5)
    b = simulate_paths(ref_env, s_star(), 40, 3000, seed=9, u=u_ref, persistence_N=5)
    assert a.to_dict() == b.to_dict()
    c = simulate_paths(ref_env, s_star(), 40, 3000, seed=10, u=u_ref)
    assert c.value_estimate != a.value_estimate


def test_block_size_does_not_matter(two_env, u_ref):
    a = simulate_paths(two_env, s_star_learning(), 30, 500, seed=4, u=u_ref, keep_reps=True, block=64)
    b = simulate_paths(two_env, s_star_learning(), 30, 500, seed=4, u=u_ref, keep_reps=True, block=500)
    assert np.array_equal(a.per_rep["final_sum"], b.per_rep["final_sum"])
    assert a.to_dict() == b.to_dict()


def test_report_invariants(ref_env, two_env, u_ref):
    for env, s in ((ref_env, s_star()), (two_env, s_star_learning())):
        r = simulate_paths(env, s, 25, 2000, seed=1, u=u_ref, keep_reps=True)
        assert math.isfinite(r.value_estimate)
        assert sum(r.pull_frequency.values()) == pytest.approx(1.0)
        assert sum(r.final_pull_frequency.values()) == pytest.approx(1.0)
        v = r.per_rep["value"]
        assert r.std_error == pytest.approx(v.std(ddof=1) / math.sqrt(v.size), rel=1e-12)
        assert r.value_estimate == pytest.approx(v.mean(), rel=1e-12)
    assert sum(r.posterior_histogram) == 2000


def test_first_replication_uses_its_own_stream(ref_env, u_ref):
    r = simulate_paths(ref_env, single_arm("high"), 12, 3, seed=21, u=u_ref, keep_reps=True)
    u = stream(21, 0).random(12)
    steps = np.where(u < 0.5, 1.0, -1.0)
    assert r.per_rep["final_sum"][0] == steps.sum()


@pytest.mark.parametrize("n", [10, 100])
@pytest.mark.parametrize(
    "make",
    [lambda n: s_star(), lambda n: single_arm("low"), lambda n: s_star_horizon(n, 0.2), lambda n: custom_strategy(lambda h: "high" if h.stage % 3 else "low")],
)
def test_mc_agrees_with_dp(ref_env, u_ref, n, make):
    s = make(n)
    exact = strategy_value_n(ref_env, s, u_ref, n)
    for seed in range(3):
        r = simulate_paths(ref_env, s, n, 3000, seed=seed, u=u_ref)
        assert abs(r.value_estimate - exact) < 4 * r.std_error


@pytest.mark.parametrize("s", [s_star_learning(), single_arm("b")])
def test_mc_agrees_with_dp_learning(two_env, u_ref, s):
    exact = strategy_value_n(two_env, s, u_ref, 40)
    for seed in range(3):
        r = simulate_paths(two_env, s, 40, 3000, seed=seed, u=u_ref)
        assert abs(r.value_estimate - exact) < 4 * r.std_error


def test_linear_scaling_against_dp(ref_env, u_ref):
    exact = strategy_value_n(ref_env, s_star(), u_ref, 50, scaling="linear")
    r = simulate_paths(ref_env, s_star(), 50, 4000, seed=2, u=u_ref, scaling="linear")
    assert abs(r.value_estimate - exact) < 4 * r.std_error


def test_persistence_window_shrinks(ref_env, u_ref):
    short = simulate_paths(ref_env, s_star(), 100, 4000, seed=3, u=u_ref, persistence_N=10)
    long = simulate_paths(ref_env, s_star(), 1000, 4000, seed=3, u=u_ref, persistence_N=10)
    assert long.persistence_le <= short.persistence_le < 1
    assert long.persistence_gt <= short.persistence_gt < 1
    assert long.persistence_window == (10, 1000)


def test_single_arm_clt_ks():
    env = NoLearningEnv((symmetric_arm(1.0, "only"),))
    n, reps = 1000, 100_000
    r = simulate_paths(env, single_arm("only"), n, reps, seed=5, u=exponential_utility(0.0, 1.0), keep_reps=True)
    # spread each lattice atom (spacing 2) uniformly over its cell
    jitter = np.random.default_rng(0).uniform(-1.0, 1.0, reps)
    z = (r.per_rep["final_sum"] + jitter) / math.sqrt(n)
    assert stats.kstest(z, "norm", args=(0.0, math.sqrt(1 + 1 / (3 * n)))).statistic < 0.01


def test_learning_pull_classes(two_env, u_ref):
    r = simulate_paths(two_env, s_star_learning(), 1, 10, seed=0, u=u_ref)
    # at stage 1 with mu = 1/2 both arms have the same conditional variance
    assert r.final_pull_frequency["other"] == 1.0


def test_posterior_degenerate_prior():
    env = TwoArmedEnv(0.2, 0.8, 0.0)
    rep = posterior_consistency(env, "a", s_star_learning(), 50, 300, seed=1)
    assert rep.degenerate_prior and rep.consistent_fraction == 0.0 and rep.note
    assert rep.certain_fraction == 1.0
    rep_b = posterior_consistency(env, "b", s_star_learning(), 50, 300, seed=1)
    assert rep_b.consistent_fraction == 1.0


def test_posterior_truth_b():
    rep = posterior_consistency(TwoArmedEnv(0.2, 0.8, 0.5), "b", s_star_learning(), 300, 500, seed=2)
    assert rep.consistent_fraction > 0.95


def test_validation(ref_env, two_env, u_ref):
    with pytest.raises(ValidationError):
        simulate_paths(ref_env, s_star(), 10, 0, seed=0, u=u_ref)
    with pytest.raises(ValidationError):
        simulate_paths(ref_env, s_star(), 10, 10, seed=0, u=u_ref, scaling="cube")
    with pytest.raises(ValidationError):
        simulate_paths(ref_env, s_star_learning(), 10, 10, seed=0, u=u_ref)
    with pytest.raises(ValidationError):
        simulate_paths(two_env, s_star(), 10, 10, seed=0, u=u_ref)
    with pytest.raises(ValidationError):
        posterior_consistency(ref_env, "a", s_star(), 10, 10)
    with pytest.raises(ValidationError):
        posterior_consistency(two_env, "c", s_star_learning(), 10, 10)
