import os
import sys

import pytest

# Add project root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from hawkes_lift.hawkes_core.driver import make_driver  # noqa: E402
from hawkes_lift.hawkes_core.model import build_model  # noqa: E402
from hawkes_lift.kernel.builtins import exponential, nonmonotone  # noqa: E402
from hawkes_lift.kernel.fitting import fit_l1, fit_l2, negligible_horizon  # noqa: E402

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run acceptance-scale Monte Carlo tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale Monte Carlo run (enable with --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def nonmonotone_kernel():
    return nonmonotone()


@pytest.fixture(scope="session")
def nonmonotone_fits(nonmonotone_kernel):
    """The 2- and 3-term L1 fits on [0, 10] used as phi^(2) and phi^(3)."""
    return {n: fit_l1(nonmonotone_kernel, n, 0.5, window=negligible_horizon(0.5)) for n in (2, 3)}


@pytest.fixture(scope="session")
def nonmonotone_l2_fits(nonmonotone_kernel):
    return {n: fit_l2(nonmonotone_kernel, n, 0.5) for n in (2, 3)}


@pytest.fixture
def jump_model():
    return build_model("jump_ou")


@pytest.fixture
def linear_model():
    return build_model("linear_hawkes", lambda0=1.0)


@pytest.fixture
def half_exponential():
    return exponential(eta=0.5, beta=1.0)


@pytest.fixture
def driver_factory():
    def factory(seed=1, dt=0.01, horizon=1.0, lambda_max=10.0, model=None):
        marks = model.mark_dist if model is not None else build_model("poisson").mark_dist
        return make_driver(seed, dt, horizon, lambda_max, marks)

    return factory
