import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lossbandit import (
    UtilityIndex,
    ValidationError,
    custom_phi1,
    eval_utility,
    exponential_phi1,
    exponential_utility,
    loss_aversion_measure,
    make_utility,
)
from lossbandit.utility import phi1_from_label

thetas = st.floats(0.05, 1.0)
cs = st.floats(-3.0, 3.0)


def test_worked_values():
    u = exponential_utility(0.0, 0.5)
    assert eval_utility(u, 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-15)
    assert eval_utility(u, -1.0) == pytest.approx(2 * (math.exp(-0.5) - 1), abs=1e-15)
    assert eval_utility(u, 0.5) == pytest.approx(0.393469, abs=1e-6)
    assert eval_utility(u, -0.5) == pytest.approx(-0.442398, abs=1e-6)
    assert eval_utility(u, 0.0) == 0.0


def test_array_and_scalar_shapes():
    u = exponential_utility(0.3, 0.7)
    xs = np.linspace(-2, 2, 9)
    out = eval_utility(u, xs)
    assert out.shape == xs.shape
    assert isinstance(eval_utility(u, 0.1), float)
    assert u(0.3) == 0.0


@pytest.mark.parametrize("theta", [0.0, -0.5, 1.5, float("nan")])
def test_theta_out_of_range(theta):
    with pytest.raises(ValidationError):
        exponential_utility(0.0, theta)


def test_bad_phi1_rejected():
    with pytest.raises(ValidationError, match="phi1\\(0\\)"):
        make_utility(custom_phi1("shifted", lambda x: 1.0 - np.exp(-np.asarray(x)) + 1e-6), 0.0, 0.5)
    with pytest.raises(ValidationError, match="increasing"):
        make_utility(custom_phi1("flat", lambda x: np.minimum(np.asarray(x), 1.0)), 0.0, 0.5)
    with pytest.raises(ValidationError, match="concave"):
        make_utility(custom_phi1("convex", lambda x: np.asarray(x) ** 2 + np.asarray(x)), 0.0, 0.5)


def test_custom_phi1_roundtrip():
    spec = custom_phi1("log1p", lambda x: np.log1p(np.asarray(x, dtype=float)), 1.0)
    u = make_utility(spec, 0.2, 0.6)
    d = json.loads(json.dumps(u.to_dict()))
    assert d == {"phi1": "custom:log1p", "c": 0.2, "theta": 0.6}
    v = UtilityIndex.from_dict(d)
    assert v(1.7) == u(1.7)
    with pytest.raises(ValidationError):
        phi1_from_label("custom:unregistered")
    with pytest.raises(ValidationError):
        UtilityIndex.from_dict({"phi1": "exponential"})


def test_exponential_roundtrip():
    u = exponential_utility(-0.25, 0.8)
    assert UtilityIndex.from_dict(u.to_dict()) == u


def test_loss_aversion_measure_examples():
    assert loss_aversion_measure(exponential_utility(0, 0.5)) == pytest.approx(1.0)
    assert loss_aversion_measure(exponential_utility(0, 1.0)) == 0.0
    u = exponential_utility(0, 0.5)
    assert 2 * u(1.0) + u(-2.0) == pytest.approx(0.0, abs=1e-15)


def test_loss_aversion_detects_stateful_phi1():
    calls = {"n": 0}

    def drifting(x):
        calls["n"] += 1
        x = np.asarray(x, dtype=float)
        return (1.0 + 1e-3 * (calls["n"] > 3)) * -np.expm1(-x)

    u = make_utility(custom_phi1("drifting", drifting), 0.0, 0.5)
    with pytest.raises(ValidationError, match="indifference"):
        loss_aversion_measure(u)


@given(cs, thetas)
def test_continuity_at_reference(c, theta):
    u = exponential_utility(c, theta)
    left = eval_utility(u, np.nextafter(c, -np.inf))
    right = eval_utility(u, c)
    assert abs(left - right) < 1e-12


@given(cs, thetas)
@settings(max_examples=30)
def test_c1_at_reference(c, theta):
    u = exponential_utility(c, theta)
    h = 1e-6
    right = (u(c + h) - u(c)) / h
    left = (u(c) - u(c - h)) / h
    assert right == pytest.approx(1.0, abs=1e-5)
    assert left == pytest.approx(1.0, abs=1e-5)


@given(cs, st.floats(0.05, 0.99), st.floats(0.01, 8.0))
def test_strict_loss_aversion(c, theta, x):
    u = exponential_utility(c, theta)
    assert u(c + x) + u(c - x) < 0


@given(cs, thetas)
@settings(max_examples=30)
def test_curvature_signs(c, theta):
    u = exponential_utility(c, theta)
    h = 0.05
    gains = c + np.linspace(0.1, 5, 40)
    losses = c - np.linspace(0.1, 5, 40)
    assert np.all(u(gains + h) - 2 * u(gains) + u(gains - h) <= 1e-15)
    assert np.all(u(losses + h) - 2 * u(losses) + u(losses - h) >= -1e-15)


@given(cs, thetas)
@settings(max_examples=30)
def test_indifference_identity(c, theta):
    u = exponential_utility(c, theta)
    assert loss_aversion_measure(u) == pytest.approx(1 / theta - 1, rel=1e-14, abs=1e-14)


@given(st.floats(-5, 5), st.floats(-5, 5), cs, thetas)
def test_monotone(x, y, c, theta):
    u = exponential_utility(c, theta)
    lo, hi = min(x, y), max(x, y)
    assert u(lo) <= u(hi)


def test_exponential_phi1_values():
    phi1 = exponential_phi1()
    assert phi1(np.array([0.0]))[0] == 0.0
    assert phi1(np.array([2.0]))[0] == pytest.approx(1 - math.exp(-2))
