import os

import pytest

from quadie.grid import make_grid
from quadie.problem import ProblemSpec, certify


def pytest_addoption(parser):
    parser.addoption("--skip-slow", action="store_true", help="skip slow tests")
    parser.addoption(
        "--strict-data-files",
        action="store_true",
        help="Fail if a test is skipped for missing data file.",
    )


def pytest_runtest_setup(item):
    if "slow" in item.keywords and item.config.getoption("--skip-slow"):
        pytest.skip("skipping due to --skip-slow")


@pytest.fixture
def datapath(request):
    """Get the path to a data file.

    Parameters
    ----------
    path : str
        Path to the file, relative to ``quadie/tests/``

    Returns
    -------
    path : path including ``quadie/tests``.

    Raises
    ------
    ValueError
        If the path doesn't exist and the --strict-data-files option is set.
    """
    BASE_PATH = os.path.join(os.path.dirname(__file__), "tests")

    def deco(*args):
        path = os.path.join(BASE_PATH, *args)
        if not os.path.exists(path):
            if request.config.getoption("--strict-data-files"):
                msg = "Could not find file {} and --strict-data-files is set."
                raise ValueError(msg.format(path))
            else:
                msg = "Could not find {}."
                pytest.skip(msg.format(path))
        return path

    return deco


def make_problem(multiplier="0.02", g="u1^2", initial="0.01*exp(-x^2)", n=4096, **kw):
    """Single-component problem with an exp(-|x|) kernel on [-20, 20]"""
    return ProblemSpec(
        N=1,
        grid=make_grid(20, n),
        kernels=("exp(-abs(x))",),
        multipliers=(multiplier,),
        initial=(initial,),
        nonlinearity=(g,),
        rho=kw.pop("rho", 1.0),
        **kw,
    )


@pytest.fixture(scope="session")
def reference_problem():
    """The certified quadratic instance"""
    return make_problem()


@pytest.fixture(scope="session")
def reference_certificate(reference_problem):
    return certify(reference_problem, seed=0)
