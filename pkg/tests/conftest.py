import sys
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sparsetfd.errors import NumericWarning

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _quiet_branch_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NumericWarning)
        yield


def random_signal(N, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(N) + 1j * rng.standard_normal(N)


def tone(N, f0):
    return np.exp(2j * np.pi * f0 * np.arange(N))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
