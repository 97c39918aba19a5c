import math
import sys

import numpy as np
import pytest


def within_pooled_se(mean_a, se_a, mean_b, se_b=0.0, k=3.0):
    """|a - b| <= k * sqrt(se_a^2 + se_b^2)."""
    return abs(mean_a - mean_b) <= k * math.hypot(se_a, se_b)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(module.RESULTS):
        terminalreporter.write_line(line)
