"""
Quadrature norms on the truncated grid and the constants tied to them.

Integrals use the composite trapezoid rule on the uniform grid, derivatives
the second-order differences of :func:`quadie.grid.derivative`, and the sup
norm is the node maximum.

The default algebra constant ``C_ALGEBRA = sqrt(5/2)`` follows from the one
dimensional embedding ``|f|_inf <= |f|_H1 / sqrt(2)``::

    |fg|_2^2  <= |f|_inf^2 |g|_2^2
    |(fg)'|_2 <= |g|_inf |f'|_2 + |f|_inf |g'|_2

Adding the squares and applying the embedding to each sup norm bounds
``|fg|_H1^2`` by ``(1/2 + 2) |f|_H1^2 |g|_H1^2``.
"""

from dataclasses import asdict, dataclass
import logging
import math
import warnings

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm, qmc

from quadie._utils import _init_rng, _sanitize_positive
from quadie.compat import trapezoid
from quadie.exceptions import StochasticEstimateWarning, TruncationWarning
from quadie.exprlang import differentiate, evaluate, variables
from quadie.grid import (
    DEFAULT_TAIL_TOLERANCE,
    VectorGridFunction,
    _gradient,
    derivative,
    truncation_diagnostic,
)

logger = logging.getLogger(__name__)

C_ALGEBRA = math.sqrt(2.5)
EMBEDDING_CONSTANT = 1.0 / math.sqrt(2.0)

# ball scan sizes
SCAN_POINTS_1D = 10001
SOBOL_EXPONENT = 17
REFINE_STARTS = 10


def norm_l2(f):
    return math.sqrt(trapezoid(f.values * f.values, dx=f.grid.h))


def norm_l1(f):
    return float(trapezoid(np.abs(f.values), dx=f.grid.h))


def norm_linf(f):
    return float(np.max(np.abs(f.values)))


def norm_h1(f):
    """sqrt(|f|_2^2 + |f'|_2^2)"""
    return math.sqrt(_h1_sq(f.values, f.grid.h))


def norm_h1_vector(u):
    """
    H1 norm of a vector function: the root of the summed squared component norms
    """
    if not isinstance(u, VectorGridFunction):
        raise TypeError(f"expected a VectorGridFunction, not {type(u).__name__}")
    return math.sqrt(_h1_sq(u.values, u.grid.h))


def norm_w11(K):
    """|K|_1 + |K'|_1"""
    return norm_l1(K) + norm_l1(derivative(K))


def _h1_sq(values, h):
    """Summed squared H1 norms of the rows of an (..., n) array"""
    d = _gradient(values, h)
    return float(np.sum(trapezoid(values * values + d * d, dx=h, axis=-1)))


@dataclass(frozen=True)
class NormReport:
    """
    Requested norms of one function; entries not requested are None
    """

    l1: float = None
    l2: float = None
    linf: float = None
    h1: float = None
    w11: float = None

    def __post_init__(self):
        for name, value in self.to_dict().items():
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, not {value!r}")

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}

    def to_text(self):
        """Flat ``key = value`` block"""
        return "\n".join(f"{k} = {v:.17g}" for k, v in self.to_dict().items())


_NORMS = {
    "l1": norm_l1,
    "l2": norm_l2,
    "linf": norm_linf,
    "h1": norm_h1,
    "w11": norm_w11,
}


def norm_report(f, which=("l1", "l2", "linf", "h1", "w11")):
    """
    Compute several norms of ``f`` at once

    Parameters
    ----------
    f : GridFunction
    which : sequence of str
        Any of ``"l1"``, ``"l2"``, ``"linf"``, ``"h1"``, ``"w11"``.

    Returns
    -------
    NormReport
    """
    unknown = set(which) - set(_NORMS)
    if unknown:
        raise ValueError(f"unknown norms: {sorted(unknown)}")
    return NormReport(**{name: _NORMS[name](f) for name in which})


@dataclass(frozen=True)
class C1Estimate:
    """
    Estimated C1 norm of a vector nonlinearity over a ball

    ``sup_values[m]`` is the sup of ``|g_m|`` and ``sup_gradients[m, n]`` the
    sup of ``|dg_m/du_n|``; ``value`` sums them all. ``lower_estimate`` is True
    when the sups come from sampling, which can only underestimate.
    """

    value: float
    lower_estimate: bool
    sup_values: np.ndarray
    sup_gradients: np.ndarray


def _names(N):
    return [f"u{k}" for k in range(1, N + 1)]


def _check_nonlinearity(g):
    g = tuple(g)
    if not g:
        raise ValueError("at least one component is required")
    allowed = set(_names(len(g)))
    for m, gm in enumerate(g):
        extra = variables(gm) - allowed
        if extra:
            raise ValueError(f"g[{m}] uses {sorted(extra)}, allowed {sorted(allowed)}")
    return g


def _ball_points(N, radius, rng):
    """Sobol points filling the ball plus its center and the axis extremes"""
    engine = qmc.Sobol(d=N + 1, scramble=True, seed=rng)
    base = engine.random_base2(m=SOBOL_EXPONENT)
    eps = np.finfo(float).eps
    direction = norm.ppf(np.clip(base[:, :N], eps, 1 - eps))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    r = radius * base[:, N] ** (1.0 / N)
    axes = radius * np.vstack([np.eye(N), -np.eye(N)])
    return np.vstack([np.zeros((1, N)), axes, direction * r[:, None]])


def _project(y, radius):
    length = np.linalg.norm(y)
    return y if length <= radius else y * (radius / length)


def _sup_1d(phi, radius):
    z = np.linspace(-radius, radius, SCAN_POINTS_1D)
    values = np.broadcast_to(evaluate(phi, {"u1": z}), z.shape)
    return float(np.max(np.abs(values)))


def _sup_ball(phi, points, names, radius):
    bindings = dict(zip(names, points.T))
    values = np.abs(np.broadcast_to(evaluate(phi, bindings), points.shape[:1]))
    best = float(np.max(values))
    if not variables(phi):
        return best

    def objective(y):
        return -abs(evaluate(phi, dict(zip(names, _project(y, radius)))))

    for idx in np.argsort(values)[-REFINE_STARTS:]:
        res = minimize(
            objective,
            points[idx],
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 200 * len(names)},
        )
        best = max(best, -float(res.fun))
    return best


def c1_norm_over_ball(g, radius, seed=0):
    """
    Estimate the C1 norm of ``g`` over the closed ball of ``radius``

    Parameters
    ----------
    g : sequence of Expr
        N components in the variables ``u1 ... uN``.
    radius : float
        > 0.
    seed : None, int or numpy.random.Generator, default 0
        Drives the quasi-random scan for N >= 2.

    Returns
    -------
    C1Estimate
        For N = 1 a uniform scan of the interval, for N >= 2 a scrambled
        Sobol sample of the ball refined by Nelder-Mead from the best
        candidates, flagged as a lower estimate.

    Raises
    ------
    ExprDomainError
        When some component or partial derivative is undefined in the ball.
    """
    g = _check_nonlinearity(g)
    radius = _sanitize_positive(radius, "radius")
    N = len(g)
    names = _names(N)
    grads = [[differentiate(gm, name) for name in names] for gm in g]

    if N == 1:
        sup_values = np.array([_sup_1d(g[0], radius)])
        sup_gradients = np.array([[_sup_1d(grads[0][0], radius)]])
        lower = False
    else:
        rng = _init_rng(seed)
        points = _ball_points(N, radius, rng)
        sup_values = np.array([_sup_ball(gm, points, names, radius) for gm in g])
        sup_gradients = np.array(
            [[_sup_ball(d, points, names, radius) for d in row] for row in grads]
        )
        lower = True
        warnings.warn(
            f"C1 norm over a ball in {N} dimensions estimated by sampling",
            StochasticEstimateWarning,
            stacklevel=2,
        )
    value = float(sup_values.sum() + sup_gradients.sum())
    logger.debug("C1 norm over ball of radius %.6g: %.12g", radius, value)
    return C1Estimate(value, lower, sup_values, sup_gradients)


def embedding_ratio(f, tail_tolerance=DEFAULT_TAIL_TOLERANCE):
    """
    Ratio |f|_inf / |f|_H1, bounded by 1/sqrt(2) for functions on the line

    A ``TruncationWarning`` marks inputs that do not decay inside the grid;
    their ratio is returned but says nothing about the line.
    """
    h1 = norm_h1(f)
    if h1 == 0:
        raise ValueError("embedding ratio of the zero function is undefined")
    diag = truncation_diagnostic(f)
    if diag.tail_fraction > tail_tolerance:
        warnings.warn(
            f"tail fraction {diag.tail_fraction:.3g} exceeds {tail_tolerance:.3g}; "
            "embedding ratio not certified",
            TruncationWarning,
            stacklevel=2,
        )
    return norm_linf(f) / h1


def algebra_defect(f, g, c_a=C_ALGEBRA):
    """|fg|_H1 - c_a |f|_H1 |g|_H1; non-positive when the algebra bound holds"""
    return norm_h1(f * g) - c_a * norm_h1(f) * norm_h1(g)
