"""
The perturbation map and its Picard iteration.

Writing ``u = u0 + v`` turns the system into the fixed point problem
``v = tau(v)`` with

    tau(v)_m = V_m (u0_m + v_m) * (K_m conv g_m(u0 + v))

which a passing certificate proves to be a contraction of the ball of radius
``rho`` with rate ``sigma``.
"""

from dataclasses import dataclass, field
import logging
import math
import warnings

import numpy as np
from pandas import DataFrame

from quadie._utils import _init_rng
from quadie.convolve import ConvolutionPlan
from quadie.exceptions import (
    CertificationError,
    ContractionWarning,
    ConvergenceError,
    DivergenceError,
    GridMismatchError,
)
from quadie.exprlang import evaluate
from quadie.grid import VectorGridFunction, random_mixture
from quadie.norms import _h1_sq, norm_h1_vector
from quadie.problem import _as_field, certify

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10000
# allowance on observed contraction ratios for discretization error
CONTRACTION_SLACK = 0.05
# steps with a smaller previous update are too close to round-off to judge
RATIO_FLOOR = 1e-13
DIVERGENCE_STEPS = 5
BALL_SLACK = 1e-9


def _names(N):
    return [f"u{k}" for k in range(1, N + 1)]


def _eval_g_values(g, values):
    """g applied nodewise to an (N, n) array"""
    bindings = dict(zip(_names(len(g)), values))
    shape = values.shape[1:]
    return np.vstack([np.broadcast_to(evaluate(gm, bindings), shape) for gm in g])


def eval_g(g, w):
    """
    Apply the nonlinearity nodewise

    Parameters
    ----------
    g : sequence of Expr or str
        N components in ``u1 ... uN``.
    w : VectorGridFunction
        N components.

    Returns
    -------
    VectorGridFunction
        Component m holds ``g_m(w_1(x_i), ..., w_N(x_i))``.
    """
    g = tuple(_as_field(gm, f"g[{m}]") for m, gm in enumerate(g))
    if len(g) != w.N:
        raise GridMismatchError(f"{len(g)} nonlinearities for {w.N} components")
    return VectorGridFunction.from_array(w.grid, _eval_g_values(g, w.values))


class TauMap:
    """
    The map ``v -> tau(v)`` of a problem, with kernel spectra computed once

    Parameters
    ----------
    p : ProblemSpec
    g : sequence of Expr, optional
        Nonlinearity to use instead of ``p.nonlinearity``.
    threads : int, default 1
        Worker threads of the FFTs.
    """

    def __init__(self, p, g=None, threads=1):
        self.problem = p
        self.grid = p.grid
        self.N = p.N
        g = p.nonlinearity if g is None else g
        self.g = tuple(_as_field(gm, f"g[{m}]") for m, gm in enumerate(g))
        if len(self.g) != self.N:
            raise GridMismatchError(f"{len(self.g)} nonlinearities for N = {self.N}")
        self.plan = ConvolutionPlan(p.grid, workers=threads)
        self.spectra = [self.plan.transform(K) for K in p.kernel_samples]
        self.V = np.vstack([V.values for V in p.multiplier_samples])
        self.u0 = p.u0.values

    def __call__(self, v):
        """tau on an (N, n) array of perturbation samples"""
        w = self.u0 + v
        G = _eval_g_values(self.g, w)
        conv = np.vstack(
            [self.plan.apply(s, G[m]) for m, s in enumerate(self.spectra)]
        )
        return self.V * w * conv

    def norm(self, values):
        return math.sqrt(_h1_sq(values, self.grid.h))

    def wrap(self, values):
        return VectorGridFunction.from_array(self.grid, values)

    def _values(self, v):
        if v.grid != self.grid or v.N != self.N:
            raise GridMismatchError("iterate does not match the problem grid or N")
        return v.values


def apply_tau(p, cert, v, threads=1):
    """
    One application of the perturbation map

    Parameters
    ----------
    p : ProblemSpec
    cert : Certificate
        Must pass.
    v : VectorGridFunction
        Inside the ball of radius ``p.rho``.

    Returns
    -------
    VectorGridFunction
    """
    if not cert.ok:
        raise CertificationError(cert)
    tau = TauMap(p, threads=threads)
    values = tau._values(v)
    size = tau.norm(values)
    if size > p.rho + BALL_SLACK:
        raise ValueError(f"|v|_H1 = {size:.6g} lies outside the ball of radius {p.rho}")
    return tau.wrap(tau(values))


class IterationTrace:
    """
    Per-step record of a Picard run

    ``delta[k]`` is the H1 distance between iterates k + 1 and k, ``norm[k]``
    the H1 norm of iterate k and ``ratio[k] = delta[k] / delta[k - 1]`` (NaN
    for k = 0 or a vanishing previous update).
    """

    def __init__(self):
        self.delta = []
        self.ratio = []
        self.norm = []

    def __len__(self):
        return len(self.delta)

    def record(self, delta, norm):
        prev = self.delta[-1] if self.delta else 0.0
        self.ratio.append(delta / prev if prev > 0 else math.nan)
        self.delta.append(delta)
        self.norm.append(norm)

    def growing_steps(self):
        """Length of the run of consecutive growing updates at the end"""
        count = 0
        for k in range(len(self.delta) - 1, 0, -1):
            if self.delta[k] > self.delta[k - 1]:
                count += 1
            else:
                break
        return count

    def max_ratio(self, start=2, floor=RATIO_FLOOR):
        """Largest ratio from step ``start`` on, skipping round-off dominated steps"""
        ratios = [
            r
            for k, r in enumerate(self.ratio)
            if k >= start and self.delta[k - 1] > floor
        ]
        return max(ratios) if ratios else math.nan

    def to_frame(self):
        return DataFrame(
            {
                "k": np.arange(len(self.delta)),
                "delta": self.delta,
                "ratio": self.ratio,
                "norm": self.norm,
            }
        )

    def to_csv(self, path_or_buf=None):
        return self.to_frame().to_csv(path_or_buf, index=False, float_format="%.17g")


@dataclass
class Solution:
    u_p: VectorGridFunction
    u: VectorGridFunction
    residual: float
    iterations: int
    converged: bool
    trace: IterationTrace
    certificate: object = None
    notes: list = field(default_factory=list)

    @property
    def max_ratio(self):
        return self.trace.max_ratio()

    def summary(self):
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
            "max_ratio": self.max_ratio,
            "sigma": None if self.certificate is None else self.certificate.sigma,
            "u_p_norm": norm_h1_vector(self.u_p),
            "notes": list(self.notes),
        }


def solve(
    p,
    cert=None,
    tol=DEFAULT_TOL,
    max_iter=DEFAULT_MAX_ITER,
    force=False,
    initial=None,
    threads=1,
    seed=0,
):
    """
    Find the fixed point of the perturbation map by Picard iteration

    Parameters
    ----------
    p : ProblemSpec
    cert : Certificate, optional
        Computed with ``certify(p, seed)`` when not given.
    tol : float, default 1e-10
        Stop once an update is below ``tol * max(1, |v^k|_H1)``.
    max_iter : int, default 10000
    force : bool, default False
        Iterate even when the certificate fails or ``initial`` lies outside
        the ball; recorded in the notes.
    initial : VectorGridFunction, optional
        Starting perturbation, zero by default.
    threads : int, default 1
    seed : None, int or numpy.random.Generator, default 0

    Returns
    -------
    Solution
        ``converged`` also requires ``residual(p, u) <= 10 * tol``.

    Raises
    ------
    CertificationError
        When the certificate fails and ``force`` is not set.
    DivergenceError
        After five consecutive growing updates or on a non-finite iterate.
    ConvergenceError
        When ``max_iter`` is reached or the residual check fails; the partial
        solution is attached.
    """
    if tol <= 0:
        raise ValueError(f"tol must be > 0, not {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, not {max_iter}")
    if cert is None:
        cert = certify(p, seed=seed)
    notes = []
    if not cert.ok:
        if not force:
            raise CertificationError(cert)
        notes.append("forced run on an uncertified problem")

    tau = TauMap(p, threads=threads)
    if initial is None:
        v = np.zeros((p.N, p.grid.n))
    else:
        v = tau._values(initial)
        start = tau.norm(v)
        if start > p.rho + BALL_SLACK:
            if not force:
                raise ValueError(f"initial iterate norm {start:.6g} > rho = {p.rho}")
            notes.append(f"forced start outside the ball (norm {start:.6g})")

    trace = IterationTrace()
    stopped = False
    for k in range(max_iter):
        new = tau(v)
        if not np.all(np.isfinite(new)):
            solution = _finish(tau, p, v, trace, cert, notes, False, tol)
            raise DivergenceError(f"non-finite iterate at step {k + 1}", solution)
        size = tau.norm(v)
        delta = tau.norm(new - v)
        trace.record(delta, size)
        v = new
        if delta <= tol * max(1.0, size):
            stopped = True
            break
        if trace.growing_steps() >= DIVERGENCE_STEPS:
            solution = _finish(tau, p, v, trace, cert, notes, False, tol)
            raise DivergenceError(
                f"updates grew for {DIVERGENCE_STEPS} consecutive steps", solution
            )
        if k % 100 == 0:
            logger.debug("step %d: delta=%.3e norm=%.6g", k, delta, size)

    solution = _finish(tau, p, v, trace, cert, notes, stopped, tol)
    if cert.ok:
        ratio = trace.max_ratio()
        if ratio > cert.sigma + CONTRACTION_SLACK:
            msg = (
                f"observed contraction ratio {ratio:.4g} exceeds "
                f"sigma + {CONTRACTION_SLACK} = {cert.sigma + CONTRACTION_SLACK:.4g}"
            )
            solution.notes.append(msg)
            warnings.warn(msg, ContractionWarning, stacklevel=2)
    logger.info(
        "solve: %d iterations, residual %.3e, converged %s",
        solution.iterations,
        solution.residual,
        solution.converged,
    )
    if not solution.converged:
        reason = "residual check failed" if stopped else f"no convergence in {max_iter}"
        raise ConvergenceError(f"{reason} (residual {solution.residual:.3e})", solution)
    return solution


def _finish(tau, p, v, trace, cert, notes, stopped, tol):
    u_p = tau.wrap(v)
    u = p.u0 + u_p
    image = tau(v)
    res = tau.norm(v - image) if np.all(np.isfinite(image)) else math.inf
    converged = stopped and res <= 10 * tol
    size = tau.norm(v)
    if converged and size > p.rho + BALL_SLACK:
        notes.append(f"converged outside the ball (norm {size:.6g} > rho = {p.rho})")
    return Solution(
        u_p=u_p,
        u=u,
        residual=res,
        iterations=len(trace),
        converged=converged,
        trace=trace,
        certificate=cert,
        notes=notes,
    )


def residual(p, u, g=None):
    """
    H1 norm of the defect ``u - u0 - V u (K conv g(u))`` of the system

    Parameters
    ----------
    p : ProblemSpec
    u : VectorGridFunction
    g : sequence of Expr, optional
        Nonlinearity to use instead of ``p.nonlinearity``.
    """
    tau = TauMap(p, g=g)
    v = tau._values(u) - tau.u0
    return tau.norm(v - tau(v))


def random_ball_point(grid, N, radius, seed=None):
    """
    Random decaying perturbation with H1 norm drawn from [0.1, 1] * radius
    """
    rng = _init_rng(seed)
    values = np.vstack([random_mixture(grid, rng).values for _ in range(N)])
    size = math.sqrt(_h1_sq(values, grid.h))
    target = radius * rng.uniform(0.1, 1.0)
    return VectorGridFunction.from_array(grid, values * (target / size))


def contraction_probe(p, cert, trials=50, seed=0, threads=1):
    """
    Largest observed ratio |tau v1 - tau v2| / |v1 - v2| over random pairs

    Parameters
    ----------
    p : ProblemSpec
    cert : Certificate
        Only ``sigma`` is used by callers comparing against the probe.
    trials : int, default 50
    seed : None, int or numpy.random.Generator, default 0

    Returns
    -------
    float
    """
    rng = _init_rng(seed)
    tau = TauMap(p, threads=threads)
    worst = 0.0
    for _ in range(trials):
        v1 = random_ball_point(p.grid, p.N, p.rho, rng).values
        v2 = random_ball_point(p.grid, p.N, p.rho, rng).values
        gap = tau.norm(v1 - v2)
        if gap > 0:
            worst = max(worst, tau.norm(tau(v1) - tau(v2)) / gap)
    logger.debug(
        "contraction probe: %.6g over %d pairs (sigma %.6g)", worst, trials, cert.sigma
    )
    return worst


def uniqueness_probe(
    p, cert=None, starts=5, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, seed=0
):
    """
    Restart the iteration from random points of the ball

    Returns
    -------
    float
        Largest H1 distance between a restarted fixed point and the one
        reached from zero.
    """
    rng = _init_rng(seed)
    if cert is None:
        cert = certify(p, seed=seed)
    base = solve(p, cert, tol=tol, max_iter=max_iter)
    worst = 0.0
    for _ in range(starts):
        start = random_ball_point(p.grid, p.N, p.rho, rng)
        other = solve(p, cert, tol=tol, max_iter=max_iter, initial=start)
        worst = max(worst, norm_h1_vector(other.u_p - base.u_p))
    return worst


def linear_regime_series(p, eps, tol=1e-16, max_terms=200):
    """
    Fixed point of the problem with ``g_m = eps * u_m`` as a power series

    With multiplication operators the system stays quadratic, so the solution
    expands as ``u = sum_j eps^j a_j`` with ``a_0 = u0`` and
    ``a_j = sum_{i + k = j - 1} V a_i (K conv a_k)``. Terms are added until
    the next one falls below ``tol`` relative to the partial sum.

    Parameters
    ----------
    p : ProblemSpec
        Only grid, kernels, multipliers and initial data are used.
    eps : float
    tol : float, default 1e-16
    max_terms : int, default 200

    Returns
    -------
    VectorGridFunction
        The summed series u (not the perturbation).
    """
    tau = TauMap(p)
    coeffs = [tau.u0]
    convs = []
    total = tau.u0.copy()
    for j in range(1, max_terms):
        last = coeffs[-1]
        convs.append(
            np.vstack([tau.plan.apply(s, last[m]) for m, s in enumerate(tau.spectra)])
        )
        term = sum(tau.V * coeffs[i] * convs[j - 1 - i] for i in range(j))
        coeffs.append(term)
        step = eps**j * term
        total = total + step
        if tau.norm(step) <= tol * max(tau.norm(total), 1e-300):
            break
    else:
        raise ConvergenceError(f"series did not settle within {max_terms} terms")
    return tau.wrap(total)
