import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def grid256():
    from icqnls.grid import make_grid
    return make_grid(256, 12.0)


@pytest.fixture(scope="session")
def grid128():
    from icqnls.grid import make_grid
    return make_grid(128, 12.0)


@pytest.fixture(scope="session")
def gaussian256(grid256):
    from icqnls.grid import WaveField
    x1, x2 = grid256.coords
    return WaveField(grid256, np.exp(-(x1 ** 2 + x2 ** 2) / 2).astype(complex))
