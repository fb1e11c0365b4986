import numpy as np
import pytest

from survwave import CensoredSample

_ACCEPTANCE = []


def random_censored(rng, n, censor_rate=0.4, ties=False):
    """Unnormalised censored sample with roughly ``censor_rate`` censoring."""
    if ties:
        y = rng.integers(1, max(2, n // 2) + 1, size=n).astype(float)
    else:
        y = rng.uniform(0.01, 1.0, size=n)
    delta = (rng.uniform(size=n) >= censor_rate).astype(np.int8)
    return CensoredSample(y, delta)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def criterion():
    """Record one acceptance line; printed now and again in the session summary."""

    def record(number, name, passed, detail):
        line = f"AC{number:<2} {'PASS' if passed else 'FAIL'}  {name}: {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
