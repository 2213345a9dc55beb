import numpy as np
import pytest

from cojumps.core import IncrementSeries
from cojumps.rng import stream
from cojumps.simulator import preset, simulate_path


def brownian(n, rho=0.0, c11=1.0, c22=1.0, seed=0, horizon=1.0):
    """Increments of a bivariate Brownian motion with constant covariance."""
    rng = stream(seed, 99)
    dt = horizon / n
    z = rng.standard_normal((n, 2))
    z[:, 1] = rho * z[:, 0] + np.sqrt(1 - rho**2) * z[:, 1]
    incs = np.sqrt(dt) * z * np.sqrt([c11, c22])
    return IncrementSeries.from_array(incs, horizon=horizon)


def scenario_path(name, n_obs, seed, *key):
    return simulate_path(preset(name), n_obs, stream(seed, *key))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


#: one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
