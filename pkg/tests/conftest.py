import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _quiet_moment_warnings():
    # explicit moment orders outside the strict regime are expected in tests
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="explicit s=")
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


@pytest.fixture
def verdict(request):
    """Record one summary line; ``ok=None`` marks an informational line."""
    lines = request.config.stash[_VERDICTS]

    def record(label, ok, detail):
        tag = "INFO" if ok is None else ("PASS" if ok else "FAIL")
        lines.append(f"{tag}  {label}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
