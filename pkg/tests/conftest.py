import sys

import numpy as np
import pytest

from wavenets.tensor import Rng


@pytest.fixture
def rng():
    return Rng(12345)


@pytest.fixture
def nprng():
    return np.random.default_rng(2024)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
