import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from lossbandit import NoLearningEnv, TwoArmedEnv, exponential_utility, symmetric_arm  # noqa: E402


@pytest.fixture
def ref_env():
    """Arms {+-0.5 w.p. 1/2} and {+-1 w.p. 1/2}: sigma_low = 0.5, sigma_high = 1."""
    return NoLearningEnv((symmetric_arm(0.5, "low"), symmetric_arm(1.0, "high")))


@pytest.fixture
def two_env():
    return TwoArmedEnv(0.2, 0.8, 0.5)


@pytest.fixture
def u_ref():
    return exponential_utility(0.0, 0.5)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
