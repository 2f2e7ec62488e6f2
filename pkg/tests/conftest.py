import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


class StubRng:
    """Returns fixed values so forced-branch examples can be checked."""

    def __init__(self, value=0.0):
        self.value = value

    def random(self, size=None):
        return np.full(size, self.value) if size is not None else self.value

    def normal(self, loc=0.0, scale=1.0, size=None):
        return np.full(size, loc) if size is not None else loc


@pytest.fixture
def stub_rng():
    return StubRng


ACCEPTANCE_RESULTS = {}


def record_acceptance(criterion, passed, detail):
    """Remember one acceptance outcome and echo it immediately."""
    line = f"[acceptance] criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_RESULTS[criterion] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[key])
