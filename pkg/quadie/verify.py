"""
Seeded property suite for the inequalities the certificate relies on.

Every check returns the worst margin ``tolerance - max(error)`` over its
trials; a check passes when that margin is non-negative.
"""

from dataclasses import dataclass
import logging
import math

import numpy as np
from pandas import DataFrame

from quadie._utils import _init_rng, timed
from quadie.convolve import convolve_direct, convolve_fft, young_defect
from quadie.exceptions import ExprDomainError
from quadie.exprlang import differentiate, evaluate, parse, random_expr
from quadie.grid import GridFunction, make_grid, random_mixture, sample
from quadie.norms import (
    C_ALGEBRA,
    EMBEDDING_CONSTANT,
    algebra_defect,
    embedding_ratio,
    norm_h1,
    norm_l2,
    norm_w11,
)

logger = logging.getLogger(__name__)

SUITE_L = 20.0
SUITE_N = 4096
DIRECT_L = 10.0
DIRECT_N = 512

EMBEDDING_TRIALS = 200
ALGEBRA_TRIALS = 200
YOUNG_TRIALS = 100
DIRECT_TRIALS = 50
GRADIENT_TRIALS = 1000
QUICK_DIVISOR = 10

FD_STEP = 1e-5
GRADIENT_VARIABLES = ("x", "u1", "u2")
GRADIENT_TRIES = 50

_GAUSSIAN = parse("exp(-x^2)")
_LAPLACE = parse("exp(-abs(x))")

# analytic values of the reference functions
GAUSSIAN_L2 = (math.pi / 2) ** 0.25
GAUSSIAN_L1 = math.sqrt(math.pi)
GAUSSIAN_H1 = math.sqrt(2 * math.sqrt(math.pi / 2))
GAUSSIAN_W11 = math.sqrt(math.pi) + 2
LAPLACE_L1 = 2.0
LAPLACE_L2 = 1.0
LAPLACE_H1 = math.sqrt(2)
LAPLACE_W11 = 4.0


@dataclass
class CheckResult:
    property: str
    trials: int
    worst_margin: float
    tolerance: float
    seconds: float = 0.0

    @property
    def passed(self):
        return bool(self.worst_margin >= 0)


def _result(name, errors, tolerance):
    errors = np.atleast_1d(np.asarray(errors, dtype=float))
    worst = float(np.max(errors)) if np.all(np.isfinite(errors)) else math.inf
    return CheckResult(name, len(errors), tolerance - worst, tolerance)


def _analytic_errors(grid, circular=False):
    """Absolute errors and tolerances of the closed form oracles"""
    gauss = sample(_GAUSSIAN, grid)
    kernel = sample(_GAUSSIAN, grid, centered=True)
    laplace_kernel = sample(_LAPLACE, grid, centered=True)
    conv = convolve_fft(kernel, gauss, circular=circular)
    exact = math.sqrt(math.pi / 2) * np.exp(-(grid.nodes**2) / 2)
    witness = embedding_ratio(sample(_LAPLACE, grid))
    return {
        "l2 gaussian": (abs(norm_l2(gauss) - GAUSSIAN_L2), 1e-6),
        "h1 gaussian": (abs(norm_h1(gauss) - GAUSSIAN_H1), 1e-4),
        "w11 laplace": (abs(norm_w11(laplace_kernel) - LAPLACE_W11), 2e-2),
        "gaussian convolution": (float(np.max(np.abs(conv.values - exact))), 1e-6),
        "embedding witness": (abs(witness - EMBEDDING_CONSTANT), 2e-2),
    }


@timed(label="analytic oracles")
def check_oracle(name, grid, circular=False):
    error, tolerance = _analytic_errors(grid, circular)[name]
    return _result(name, error, tolerance)


@timed(label="embedding sweep")
def check_embedding(grid, rng, trials=EMBEDDING_TRIALS):
    """|f|_inf / |f|_H1 <= 1/sqrt(2) on random mixtures"""
    errors = [
        embedding_ratio(random_mixture(grid, rng)) - EMBEDDING_CONSTANT
        for _ in range(trials)
    ]
    return _result("embedding sweep", errors, 1e-3)


@timed(label="algebra sweep")
def check_algebra(grid, rng, trials=ALGEBRA_TRIALS, c_a=C_ALGEBRA):
    """|fg|_H1 <= c_a |f|_H1 |g|_H1, relative to the right hand side"""
    errors = []
    for _ in range(trials):
        f = random_mixture(grid, rng)
        g = random_mixture(grid, rng)
        errors.append(algebra_defect(f, g, c_a) / (norm_h1(f) * norm_h1(g)))
    return _result("algebra sweep", errors, 1e-3)


@timed(label="young sweep")
def check_young(grid, rng, trials=YOUNG_TRIALS, circular=False):
    """Both Young defects relative to their bounds"""
    errors = []
    for _ in range(trials):
        K = random_mixture(grid, rng, centered=True)
        f = random_mixture(grid, rng)
        defect = young_defect(K, f, circular=circular)
        errors.append(defect.l2_defect / defect.l2_bound)
        errors.append(defect.deriv_defect / defect.deriv_bound)
    return _result("young sweep", errors, 1e-6)


def _laplace_bump(grid, rng):
    """exp(-|x|/w) kernel; heavy enough at the ends to expose wraparound"""
    amplitude = rng.uniform(0.5, 2.0)
    width = rng.uniform(0.5, 2.0)
    values = amplitude * np.exp(-np.abs(grid.lags) / width)
    return GridFunction(grid, values, centered=True)


@timed(label="fft vs direct")
def check_fft_direct(
    rng, trials=DIRECT_TRIALS, circular=False, L=DIRECT_L, n=DIRECT_N
):
    """Largest absolute gap between FFT and direct convolution"""
    grid = make_grid(L, n)
    errors = []
    for k in range(trials):
        if k % 2 == 0:
            K = _laplace_bump(grid, rng)
        else:
            K = random_mixture(grid, rng, centered=True)
        f = random_mixture(grid, rng)
        fast = convolve_fft(K, f, circular=circular)
        slow = convolve_direct(K, f)
        errors.append(np.max(np.abs(fast.values - slow.values)))
    return _result("fft vs direct", errors, 1e-10)


def _central_difference(e, var, bindings, step):
    hi = dict(bindings)
    lo = dict(bindings)
    hi[var] += step
    lo[var] -= step
    return (evaluate(e, hi) - evaluate(e, lo)) / (2 * step)


def _gradient_error(rng, max_trees=1000):
    """Normalized gap between a symbolic and a finite difference derivative"""
    for _ in range(max_trees):
        depth = int(rng.integers(1, 7))
        tree = random_expr(rng, depth, GRADIENT_VARIABLES)
        var = str(rng.choice(GRADIENT_VARIABLES))
        slope = differentiate(tree, var)
        for _ in range(GRADIENT_TRIES):
            point = {v: float(rng.uniform(-2.0, 2.0)) for v in GRADIENT_VARIABLES}
            try:
                if abs(evaluate(tree, point)) > 1e3:
                    continue
                exact = evaluate(slope, point)
                fd = _central_difference(tree, var, point, FD_STEP)
                coarse = _central_difference(tree, var, point, 2 * FD_STEP)
            except ExprDomainError:
                continue
            # a kink or a steep region inside the stencil
            if abs(fd - coarse) > 1e-6 * (1 + abs(fd)):
                continue
            return abs(exact - fd) / (1 + abs(exact))
    raise RuntimeError(f"no admissible expression found in {max_trees} draws")


@timed(label="symbolic gradients")
def check_gradients(rng, trials=GRADIENT_TRIALS):
    errors = [_gradient_error(rng) for _ in range(trials)]
    return _result("symbolic gradients", errors, FD_STEP)


class VerificationReport:
    """
    Outcome of :func:`run_suite`

    ``frame`` has one row per check with columns property, trials,
    worst_margin, tolerance, passed and seconds.
    """

    def __init__(self, results, seed):
        self.seed = seed
        self.results = list(results)
        self.frame = DataFrame(
            [
                {
                    "property": r.property,
                    "trials": r.trials,
                    "worst_margin": r.worst_margin,
                    "tolerance": r.tolerance,
                    "passed": r.passed,
                    "seconds": r.seconds,
                }
                for r in self.results
            ]
        )

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def failures(self):
        return [r.property for r in self.results if not r.passed]

    def to_dict(self):
        """Machine form; wall times are left out so reruns compare equal"""
        rows = self.frame.drop(columns="seconds").to_dict(orient="records")
        return {"seed": self.seed, "passed": self.passed, "checks": rows}


def run_suite(seed=0, circular=False, quick=False):
    """
    Run every property check with one seeded generator

    Parameters
    ----------
    seed : int, default 0
    circular : bool, default False
        Inject the circular (unpadded) convolution fault.
    quick : bool, default False
        A tenth of the random trials; the grid and oracles stay the same.

    Returns
    -------
    VerificationReport
    """
    rng = _init_rng(seed)
    divisor = QUICK_DIVISOR if quick else 1
    grid = make_grid(SUITE_L, SUITE_N)
    oracles = [
        check_oracle(name, grid, circular) for name in _analytic_errors(grid, circular)
    ]
    results = oracles + [
        check_embedding(grid, rng, EMBEDDING_TRIALS // divisor),
        check_algebra(grid, rng, ALGEBRA_TRIALS // divisor),
        check_young(grid, rng, YOUNG_TRIALS // divisor, circular=circular),
        check_fft_direct(rng, DIRECT_TRIALS // divisor, circular=circular),
        check_gradients(rng, GRADIENT_TRIALS // divisor),
    ]
    for r in results:
        verdict = "ok" if r.passed else "FAIL"
        logger.info("%-22s margin %+.3e %s", r.property, r.worst_margin, verdict)
    return VerificationReport(results, seed)


@dataclass
class RefinementReport:
    """
    Errors of the analytic oracles while the grid is coarsened

    ``frame`` has columns n, property, error, tolerance, passed; ``orders``
    holds log2 of the error ratio between consecutive grids, per property;
    ``failure_n`` is the largest n at which some oracle misses its tolerance
    (None when all pass down to the smallest grid).
    """

    frame: DataFrame
    orders: DataFrame
    failure_n: int = None


def refinement_study(start_n=SUITE_N, min_n=16, L=SUITE_L):
    """Halve n from ``start_n`` down to ``min_n`` and track the oracle errors"""
    rows = []
    n = start_n
    while n >= min_n:
        grid = make_grid(L, n)
        for name, (error, tolerance) in _analytic_errors(grid).items():
            rows.append((n, name, error, tolerance, error <= tolerance))
        n //= 2
    frame = DataFrame(rows, columns=["n", "property", "error", "tolerance", "passed"])
    failing = frame.loc[~frame["passed"], "n"]
    failure_n = int(failing.max()) if len(failing) else None

    errors = frame.pivot(index="n", columns="property", values="error").sort_index(
        ascending=False
    )
    coarse = errors.shift(-1)
    orders = np.log2(coarse / errors).where(errors > 1e-13)
    return RefinementReport(frame, orders.iloc[:-1], failure_n)
