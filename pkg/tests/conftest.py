import pytest

from agents.information_agent.agent import InformationAgent
from agents.oracle_agent.agent import OracleAgent
from agents.principal_agent.agent import PrincipalAgent
from models.costs import CostFunction
from models.densities import gaussian, laplace, truncated_exp_inverse, uniform


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full-size slow tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size acceptance runs, enabled with --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="module")
def gaussian_density():
    return gaussian()


@pytest.fixture(scope="module")
def uniform_density():
    return uniform()


@pytest.fixture(scope="module")
def laplace_density():
    return laplace()


@pytest.fixture(scope="module")
def exp_inverse_density():
    return truncated_exp_inverse(0.1)


@pytest.fixture(scope="module")
def quadratic_cost():
    """c(lambda) = lambda^2 / 8."""
    return CostFunction.power(a=0.125, p=2.0)


@pytest.fixture(scope="module")
def gaussian_agent(gaussian_density):
    return InformationAgent(gaussian_density)


@pytest.fixture(scope="module")
def gaussian_principal(gaussian_agent):
    return PrincipalAgent(gaussian_agent)


@pytest.fixture(scope="module")
def gaussian_oracle(gaussian_principal):
    return OracleAgent(gaussian_principal, threads=1)


@pytest.fixture(scope="module")
def uniform_principal(uniform_density):
    return PrincipalAgent(InformationAgent(uniform_density))


@pytest.fixture(scope="module")
def exp_inverse_oracle(exp_inverse_density):
    return OracleAgent(PrincipalAgent(InformationAgent(exp_inverse_density)), threads=1)
