import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "conewave", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("conewave")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_lines():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
