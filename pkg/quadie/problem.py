"""
Problem instances and certification of their hypotheses.

A problem is the system

    u_m(x) = u0_m(x) + V_m(x) u_m(x) * int K_m(x - y) g_m(u(y)) dy,   m = 1..N

on a truncated grid. ``certify`` computes the constants that decide whether
the perturbation map is a contraction of the ball of radius ``rho``:

    Q     = sqrt(sum_m |T_m|^2 |K_m|_W11^2)
    M     = C1 norm of g over the ball of radius (|u0|_H1 + 1)/sqrt(2)
    sigma = 2 c_a Q M (|u0|_H1 + 1)

and the smallness condition ``c_a M (|u0|_H1 + 1)^2 Q <= rho/2``.
"""

from dataclasses import asdict, dataclass, field
from functools import cached_property
import logging
import math

import numpy as np
from pandas import DataFrame

from quadie._utils import _init_rng, _sanitize_positive
from quadie.exceptions import ConfigError, ExprDomainError
from quadie.exprlang import Expr, differentiate, evaluate, parse, variables
from quadie.grid import (
    DEFAULT_TAIL_TOLERANCE,
    GridFunction,
    GridSpec,
    VectorGridFunction,
    derivative,
    random_mixture,
    sample,
    truncation_diagnostic,
)
from quadie.norms import (
    C_ALGEBRA,
    c1_norm_over_ball,
    norm_h1,
    norm_h1_vector,
    norm_linf,
    norm_w11,
)

logger = logging.getLogger(__name__)

DEFAULT_SAFETY_FACTOR = 1.05
NONTRIVIAL_THRESHOLD = 1e-12
DATA_NOTE = "assumption 1: "
NONLINEARITY_NOTE = "assumption 2: "
# multiplier scans run on a grid this many times finer than the problem grid
OPERATOR_REFINEMENT = 10
OPERATOR_PROBES = 8


def _as_field(item, name):
    if isinstance(item, (Expr, GridFunction)):
        return item
    if isinstance(item, (str, bytes)):
        return parse(item)
    raise TypeError(f"{name} must be an expression or a GridFunction, not {item!r}")


def _sampled(item, grid, name, centered=False):
    """Samples of a problem field, with the field name on domain errors"""
    if isinstance(item, GridFunction):
        return item
    try:
        return sample(item, grid, centered=centered)
    except ExprDomainError as err:
        raise err.with_context(field=name) from None


@dataclass(frozen=True)
class ProblemSpec:
    """
    A quadratic integral equation system on a truncated grid

    Parameters
    ----------
    N : int
        Number of components, >= 1.
    grid : GridSpec
    kernels, multipliers, initial : sequence of Expr, str or GridFunction
        ``K_m``, ``V_m`` and ``u0_m``, functions of ``x``. Sampled kernels
        live on the lag lattice, the others on the nodes.
    nonlinearity : sequence of Expr or str
        ``g_m`` in the variables ``u1 ... uN``.
    rho : float
        Radius of the ball holding the perturbation, in (0, 1].
    c_a : float, default sqrt(5/2)
        Algebra constant of H1.
    M_override : float, optional
        Use this C1 bound instead of estimating it.
    safety_factor : float, default 1.05
        Multiplies the estimated C1 norm.
    tail_tolerance : float, default 1e-6
        Largest tail fraction accepted for kernels and initial data.
    """

    N: int
    grid: GridSpec
    kernels: tuple
    multipliers: tuple
    initial: tuple
    nonlinearity: tuple
    rho: float
    c_a: float = C_ALGEBRA
    M_override: float = None
    safety_factor: float = DEFAULT_SAFETY_FACTOR
    tail_tolerance: float = DEFAULT_TAIL_TOLERANCE

    def __post_init__(self):
        if isinstance(self.N, bool) or not isinstance(self.N, (int, np.integer)):
            raise TypeError(f"N must be an integer, not {self.N!r}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, not {self.N}")
        if not isinstance(self.grid, GridSpec):
            raise TypeError("grid must be a GridSpec")
        for name in ("kernels", "multipliers", "initial", "nonlinearity"):
            items = tuple(
                _as_field(item, f"{name}[{m}]")
                for m, item in enumerate(getattr(self, name))
            )
            if len(items) != self.N:
                raise ConfigError(f"{name} has {len(items)} entries, expected {self.N}")
            object.__setattr__(self, name, items)
        self._check_fields()

        rho = _sanitize_positive(self.rho, "rho")
        if rho > 1:
            raise ValueError(f"rho must lie in (0, 1], not {rho}")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "c_a", _sanitize_positive(self.c_a, "c_a"))
        if self.M_override is not None:
            M = _sanitize_positive(self.M_override, "M_override", allow_zero=True)
            object.__setattr__(self, "M_override", M)
        safety = _sanitize_positive(self.safety_factor, "safety_factor")
        if safety < 1:
            raise ValueError(f"safety_factor must be >= 1, not {safety}")
        object.__setattr__(self, "safety_factor", safety)
        tail = _sanitize_positive(self.tail_tolerance, "tail_tolerance", True)
        object.__setattr__(self, "tail_tolerance", tail)

    def _check_fields(self):
        for name in ("kernels", "multipliers", "initial"):
            for m, item in enumerate(getattr(self, name)):
                label = f"{name}[{m}]"
                if isinstance(item, GridFunction):
                    if item.grid != self.grid:
                        raise ConfigError(f"{label} is sampled on another grid")
                    if item.centered != (name == "kernels"):
                        raise ConfigError(f"{label} is sampled on the wrong lattice")
                elif variables(item) - {"x"}:
                    raise ConfigError(f"{label} may only use x")
        allowed = {f"u{k}" for k in range(1, self.N + 1)}
        for m, gm in enumerate(self.nonlinearity):
            if isinstance(gm, GridFunction):
                raise ConfigError(f"nonlinearity[{m}] must be an expression")
            extra = variables(gm) - allowed
            if extra:
                raise ConfigError(f"nonlinearity[{m}] uses unknown {sorted(extra)}")

    @property
    def g(self):
        return self.nonlinearity

    @cached_property
    def kernel_samples(self):
        return tuple(
            _sampled(K, self.grid, f"kernels[{m}]", centered=True)
            for m, K in enumerate(self.kernels)
        )

    @cached_property
    def multiplier_samples(self):
        return tuple(
            _sampled(V, self.grid, f"multipliers[{m}]")
            for m, V in enumerate(self.multipliers)
        )

    @cached_property
    def u0(self):
        return VectorGridFunction(
            _sampled(u, self.grid, f"initial[{m}]") for m, u in enumerate(self.initial)
        )


@dataclass(frozen=True)
class Certificate:
    """
    Constants of a problem and the verdicts on its hypotheses

    ``assumption1_ok`` covers the data (kernels, initial data, multipliers),
    ``assumption2_ok`` the nonlinearity and ``rub_ok`` the smallness condition.
    """

    T_norms: tuple
    K_w11: tuple
    Q: float
    u0_h1: float
    ball_radius: float
    M: float
    M_is_lower_estimate: bool
    sigma: float
    rub_lhs: float
    rub_rhs: float
    c_a: float
    rho: float
    assumption1_ok: bool
    assumption2_ok: bool
    rub_ok: bool
    notes: tuple = field(default_factory=tuple)

    @property
    def ok(self):
        return self.assumption1_ok and self.assumption2_ok and self.rub_ok

    def to_dict(self):
        out = asdict(self)
        out["T_norms"] = [float(v) for v in self.T_norms]
        out["K_w11"] = [float(v) for v in self.K_w11]
        out["notes"] = list(self.notes)
        out["ok"] = self.ok
        return out

    def to_frame(self):
        """Two-column table of every scalar entry"""
        rows = []
        for key, value in self.to_dict().items():
            if key == "notes":
                continue
            if isinstance(value, list):
                rows.extend((f"{key}[{m}]", v) for m, v in enumerate(value))
            else:
                rows.append((key, value))
        return DataFrame(rows, columns=["quantity", "value"]).set_index("quantity")


def operator_norm_bound(V, grid):
    """
    Upper bound sup|V| + sup|V'| of the H1 norm of multiplication by V

    Parameters
    ----------
    V : Expr or GridFunction
        Expressions are scanned together with their symbolic derivative on a
        10 times refined grid; sampled multipliers use their node maxima.
    grid : GridSpec

    Returns
    -------
    float
    """
    if isinstance(V, GridFunction):
        return norm_linf(V) + norm_linf(derivative(V))
    x = grid.refined(OPERATOR_REFINEMENT)
    values = np.broadcast_to(evaluate(V, {"x": x}), x.shape)
    slopes = np.broadcast_to(evaluate(differentiate(V, "x"), {"x": x}), x.shape)
    return float(np.max(np.abs(values)) + np.max(np.abs(slopes)))


def operator_norm_probe(V, seed=None, probes=OPERATOR_PROBES):
    """Empirical lower bound of the multiplication norm from random functions"""
    rng = _init_rng(seed)
    best = 0.0
    for _ in range(probes):
        phi = random_mixture(V.grid, rng)
        size = norm_h1(phi)
        if size > 0:
            best = max(best, norm_h1(V * phi) / size)
    return best


def compute_Q(T_norms, K_w11):
    T = np.asarray(T_norms, dtype=float)
    K = np.asarray(K_w11, dtype=float)
    if T.shape != K.shape:
        raise ValueError("T_norms and K_w11 must have the same length")
    if not (np.all(np.isfinite(T)) and np.all(np.isfinite(K))):
        raise ValueError("T_norms and K_w11 must be finite")
    if np.any(T < 0) or np.any(K < 0):
        raise ValueError("T_norms and K_w11 must be >= 0")
    return float(np.sqrt(np.sum((T * K) ** 2)))


def ball_radius(u0_h1):
    """Radius (|u0|_H1 + 1)/sqrt(2) of the ball in R^N the nonlinearity is sized on"""
    if u0_h1 < 0:
        raise ValueError(f"u0_h1 must be >= 0, not {u0_h1}")
    return (u0_h1 + 1.0) / math.sqrt(2.0)


def compute_sigma(c_a, Q, M, u0_h1):
    return 2.0 * c_a * Q * M * (u0_h1 + 1.0)


def _nontrivial(f):
    return norm_linf(f) > NONTRIVIAL_THRESHOLD


def _origin_value(gm, N, name):
    origin = {f"u{k}": 0.0 for k in range(1, N + 1)}
    try:
        return evaluate(gm, origin)
    except ExprDomainError as err:
        raise err.with_context(field=name) from None


def certify(p, seed=0):
    """
    Check the hypotheses of the contraction argument for ``p``

    Runs, in order: (a) kernels nontrivial with finite W11 norm and decaying
    tails, (b) initial data finite, decaying and not identically zero,
    (c) multiplier bounds positive and finite, (d) g vanishing at the origin,
    nontrivial on the ball and bounded by M, (e) the smallness condition.
    Every failure is recorded in ``notes``; nothing stops early.

    Parameters
    ----------
    p : ProblemSpec
    seed : None, int or numpy.random.Generator, default 0
        Seeds the ball scan and the multiplier probes.

    Returns
    -------
    Certificate

    Raises
    ------
    ExprDomainError
        When a field cannot be evaluated; ``field`` names it.
    """
    rng = _init_rng(seed)
    notes = []
    data_failures = []
    g_failures = []
    tol = p.tail_tolerance

    # (a) kernels
    K_w11 = []
    for m, K in enumerate(p.kernel_samples):
        K_w11.append(norm_w11(K))
        if not _nontrivial(K):
            data_failures.append(f"kernels[{m}] vanishes on the grid")
        if not math.isfinite(K_w11[-1]):
            data_failures.append(f"kernels[{m}] has no finite W11 norm")
        tail = truncation_diagnostic(K).tail_fraction
        if tail > tol:
            data_failures.append(
                f"kernels[{m}] tail fraction {tail:.3g} exceeds {tol:.3g}"
            )

    # (b) initial data
    u0 = p.u0
    for m, comp in enumerate(u0):
        tail = truncation_diagnostic(comp).tail_fraction
        if tail > tol:
            data_failures.append(
                f"initial[{m}] tail fraction {tail:.3g} exceeds {tol:.3g}"
            )
    if not any(_nontrivial(comp) for comp in u0):
        data_failures.append("initial data vanishes identically")
    u0_h1 = norm_h1_vector(u0)

    # (c) multipliers
    T_norms = []
    for m, V in enumerate(p.multipliers):
        try:
            bound = operator_norm_bound(V, p.grid)
        except ExprDomainError as err:
            raise err.with_context(field=f"multipliers[{m}]") from None
        T_norms.append(bound)
        if not (0 < bound < math.inf):
            data_failures.append(
                f"multipliers[{m}] bound {bound:.6g} is not in (0, inf)"
            )
        else:
            probe = operator_norm_probe(p.multiplier_samples[m], rng)
            notes.append(
                f"multipliers[{m}] norm between {probe:.6g} (probes) and {bound:.6g}"
            )
    Q = compute_Q(T_norms, K_w11)
    if Q == 0:
        data_failures.append("Q vanishes")

    # (d) nonlinearity
    for m, gm in enumerate(p.nonlinearity):
        at_origin = _origin_value(gm, p.N, f"nonlinearity[{m}]")
        if at_origin != 0:
            g_failures.append(
                f"nonlinearity[{m}] is {at_origin:.6g} at the origin, not 0"
            )
    radius = ball_radius(u0_h1)
    try:
        estimate = c1_norm_over_ball(p.nonlinearity, radius, seed=rng)
    except ExprDomainError as err:
        raise err.with_context(field="nonlinearity") from None
    if not np.max(estimate.sup_values) > NONTRIVIAL_THRESHOLD:
        g_failures.append(f"nonlinearity vanishes on the ball of radius {radius:.6g}")
    if p.M_override is not None:
        M = p.M_override
        if M < estimate.value:
            g_failures.append(
                f"M_override {M:.6g} is below the C1 norm estimate {estimate.value:.6g}"
            )
    else:
        M = estimate.value * p.safety_factor
    if estimate.lower_estimate:
        notes.append("M rests on a sampled C1 norm and may underestimate it")
    notes.extend(DATA_NOTE + note for note in data_failures)
    notes.extend(NONLINEARITY_NOTE + note for note in g_failures)
    data_ok = not data_failures
    g_ok = not g_failures

    # (e) smallness
    sigma = compute_sigma(p.c_a, Q, M, u0_h1)
    rub_lhs = p.c_a * M * (u0_h1 + 1.0) ** 2 * Q
    rub_rhs = p.rho / 2.0
    rub_ok = rub_lhs <= rub_rhs and sigma < 1
    if not rub_ok:
        notes.append(
            f"smallness condition fails: {rub_lhs:.6g} > {rub_rhs:.6g} "
            f"(sigma = {sigma:.6g})"
        )

    cert = Certificate(
        T_norms=tuple(T_norms),
        K_w11=tuple(K_w11),
        Q=Q,
        u0_h1=u0_h1,
        ball_radius=radius,
        M=M,
        M_is_lower_estimate=estimate.lower_estimate and p.M_override is None,
        sigma=sigma,
        rub_lhs=rub_lhs,
        rub_rhs=rub_rhs,
        c_a=p.c_a,
        rho=p.rho,
        assumption1_ok=data_ok,
        assumption2_ok=g_ok,
        rub_ok=rub_ok,
        notes=tuple(notes),
    )
    logger.info(
        "certify: Q=%.6g M=%.6g sigma=%.6g smallness %.6g <= %.6g: %s",
        Q,
        M,
        sigma,
        rub_lhs,
        rub_rhs,
        cert.ok,
    )
    return cert
