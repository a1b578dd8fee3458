import numpy as np
import pytest

from pdcsim.config import RunConfig
from pdcsim.jsa import build_jsa
from pdcsim.schmidt import decompose


@pytest.fixture(scope="session")
def default_config():
    return RunConfig.load()


@pytest.fixture(scope="session")
def pump(default_config):
    return default_config.pump()


@pytest.fixture(scope="session")
def pm(default_config):
    return default_config.phasematching()


@pytest.fixture(scope="session")
def jsa(pump, pm):
    return build_jsa(pump, pm)


@pytest.fixture(scope="session")
def decomposition(jsa):
    return decompose(jsa)


def ladder(k_modes, x=None):
    """Geometric Schmidt ladder ``c_k ~ x^k`` normalized to ``sum c^2 = 1``."""
    c = np.ones(k_modes) if x is None else x ** np.arange(k_modes)
    return c / np.linalg.norm(c)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
