import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mixedlp.exponent import Grid

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_grid():
    """[0, 2] with 4 cells: midpoints 0.25, 0.75, 1.25, 1.75."""
    return Grid(0.0, 2.0, 4)


@pytest.fixture
def window():
    """Window with margin around (0, 1), 64 cells per unit."""
    return Grid(-1.0, 3.0, 256)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
