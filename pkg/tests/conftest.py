import math

import numpy as np
import pytest

from resonant_fk import example_model, expand
from resonant_fk.model import EXAMPLE_AMPLITUDE

SQRT2 = math.sqrt(2.0)


@pytest.fixture(scope="session")
def model():
    return example_model()


@pytest.fixture(scope="session")
def sol3(model):
    return expand(model, 3)


@pytest.fixture(scope="session")
def amp():
    return EXAMPLE_AMPLITUDE


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance verdict lines after the run."""
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
