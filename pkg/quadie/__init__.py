import os
import sys

try:
    from ._version import __version__
except ImportError:  # pragma: no cover
    __version__ = "0+unknown"

from .convolve import ConvolutionPlan, convolve_direct, convolve_fft, young_defect
from .exprlang import differentiate, evaluate, parse
from .grid import GridFunction, GridSpec, VectorGridFunction, make_grid, sample
from .io import read_problem
from .norms import (
    c1_norm_over_ball,
    embedding_ratio,
    norm_h1,
    norm_l1,
    norm_l2,
    norm_linf,
    norm_report,
    norm_w11,
)
from .problem import Certificate, ProblemSpec, certify
from .sensitivity import compare_g, sensitivity_sweep
from .solver import apply_tau, residual, solve
from .verify import refinement_study, run_suite

PKG = os.path.dirname(__file__)

__all__ = [
    "__version__",
    "Certificate",
    "ConvolutionPlan",
    "GridFunction",
    "GridSpec",
    "ProblemSpec",
    "VectorGridFunction",
    "apply_tau",
    "c1_norm_over_ball",
    "certify",
    "compare_g",
    "convolve_direct",
    "convolve_fft",
    "differentiate",
    "embedding_ratio",
    "evaluate",
    "make_grid",
    "norm_h1",
    "norm_l1",
    "norm_l2",
    "norm_linf",
    "norm_report",
    "norm_w11",
    "parse",
    "read_problem",
    "refinement_study",
    "residual",
    "run_suite",
    "sample",
    "sensitivity_sweep",
    "solve",
    "test",
    "young_defect",
]


def test(extra_args=None):
    """
    Run the test suite

    Parameters
    ----------
    extra_args : {str, List[str]}
        A string or list of strings to pass to pytest. Default is
        ["--skip-slow"]
    """
    try:
        import pytest
    except ImportError as err:
        raise ImportError("Need pytest>=6.0 to run tests") from err
    cmd = ["--skip-slow"]
    if extra_args:
        if not isinstance(extra_args, list):
            extra_args = [extra_args]
        cmd = extra_args
    cmd += [PKG]
    joined = " ".join(cmd)
    print(f"running: pytest {joined}")
    sys.exit(pytest.main(cmd))
