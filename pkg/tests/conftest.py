import numpy as np
import pytest

from interfacelab.catalog import experiment

# filled by test_acceptance.py; one line per criterion in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_haldane():
    """Haldane | wide-gap staggered on a 24 x 48 strip; cached eigenpairs are shared."""
    return experiment("haldane_vs_staggered", length_1=24, half_width_2=24)
