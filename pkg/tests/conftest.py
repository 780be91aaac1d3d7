import sys

import numpy as np
import pytest

from dampedeuler.params import derive_gas_model


@pytest.fixture(scope="session")
def model2():
    return derive_gas_model(2.0, 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    # repeat the per-criterion verdicts below the test report
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
