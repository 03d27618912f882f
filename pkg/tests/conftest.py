import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("mtv", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("mtv")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, n, sparse=True):
    """Nonnegative test image on a 2**n grid, with repeated values when sparse."""
    size = 2**n
    a = rng.random((size, size))
    if sparse:
        a = np.where(rng.random((size, size)) < 0.4, 0.0, np.round(a * 4) / 4)
    return a


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for the acceptance summary."""

    def record(number, title, passed, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} | {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
