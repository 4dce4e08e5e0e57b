import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from snls.grid import make_grid

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(64, 8.0)


@pytest.fixture(scope="session")
def grid128():
    return make_grid(128, 12.0)


def gaussian(grid, amplitude=1.0, sigma=1.0, center=(0.0, 0.0), k=(0.0, 0.0)):
    x1, x2 = grid.mesh
    r2 = (x1 - center[0]) ** 2 + (x2 - center[1]) ** 2
    return amplitude * np.exp(-r2 / sigma**2 + 1j * (k[0] * x1 + k[1] * x2))


# One "PASS/FAIL criterion N: ..." line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
