import sys

import pytest

from sdrl.action_lang import initial_state
from sdrl.config import TAXI_INITIAL
from sdrl.envs import montezuma, taxi
from sdrl.envs.synthetic import GraphSpec, make_synthetic


@pytest.fixture(scope="session")
def mz():
    return montezuma.load()


@pytest.fixture(scope="session")
def mz_start():
    return montezuma.symbolic_state("mp", False)


@pytest.fixture(scope="session")
def taxi_d():
    return taxi.load_description()


@pytest.fixture(scope="session")
def taxi_i(taxi_d):
    return initial_state(taxi_d, TAXI_INITIAL)


@pytest.fixture
def two_state():
    """a --go(+5)--> b, nothing leaves b."""
    return make_synthetic(GraphSpec(("a", "b"), (("a", "go", "b", 5.0),), "a"))



def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
