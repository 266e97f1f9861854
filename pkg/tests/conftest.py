import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from polarstack.core import CRC24C_POLY, build_code_config, config_from_info_set

settings.register_profile(
    "polarstack", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True,
)
settings.load_profile("polarstack")

# lines reported by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "property: invariant checks run under hypothesis")
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def pc8():
    return config_from_info_set(8, [3, 5, 6, 7])


@pytest.fixture(scope="session")
def pc1024():
    return build_code_config(1024, 512, 24, CRC24C_POLY)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
