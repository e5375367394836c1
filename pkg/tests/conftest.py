import warnings

import numpy as np
import pytest

from kdvls import continuation
from kdvls.model import ExactFamily, Family, sample_exact


@pytest.fixture(scope="session")
def bright():
    fam = ExactFamily(Family.SECH_BRIGHT, 1.0, -0.125)
    return fam, sample_exact(fam)


@pytest.fixture(scope="session")
def kdv():
    fam = ExactFamily(Family.KDV_UNCOUPLED, 1.0)
    return fam, sample_exact(fam)


@pytest.fixture(scope="session")
def branch_j1():
    """Unanalyzed first-pitchfork branch at k = 1/6 on the default a-sweep."""
    return continuation.continue_branch(1, 1.0, 1.0 / 6.0, analyze=False)


@pytest.fixture(scope="session")
def analyzed_j1():
    return continuation.continue_branch(1, 1.0, 1.0 / 6.0, [0.05, 0.1, 0.15])


@pytest.fixture(scope="session")
def analyzed_j2():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return continuation.continue_branch(2, 1.0, 0.5, [0.02, 0.04, 0.06])


def observed_order(err_coarse, err_fine, factor=2.0):
    return float(np.log(err_coarse / err_fine) / np.log(factor))


# -- acceptance reporting ------------------------------------------------------

ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
