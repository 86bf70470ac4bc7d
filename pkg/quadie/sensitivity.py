"""
Continuity of the solution in the nonlinearity.

For two nonlinearities bounded by one C1 constant M the fixed points satisfy

    |u1 - u2|_H1 <= sigma / (2 M (1 - sigma)) (|u0|_H1 + 1) |g1 - g2|_C1

which ``compare_g`` checks against actual solves.
"""

from dataclasses import dataclass, replace
import logging

import numpy as np
from pandas import DataFrame

from quadie.exceptions import CertificationError
from quadie.exprlang import scale, subtract
from quadie.norms import c1_norm_over_ball, norm_h1_vector
from quadie.problem import _as_field, certify
from quadie.solver import DEFAULT_MAX_ITER, DEFAULT_TOL, IterationTrace, TauMap, solve

logger = logging.getLogger(__name__)

# relative allowance on the continuity bound for discretization error
BOUND_SLACK = 1e-6


def _exprs(g, name):
    return tuple(_as_field(gm, f"{name}[{m}]") for m, gm in enumerate(g))


def c1_distance(g1, g2, radius, seed=0):
    """
    C1 norm of ``g1 - g2`` over the ball of ``radius``

    The components are subtracted symbolically and scanned like
    :func:`quadie.norms.c1_norm_over_ball`.
    """
    g1 = _exprs(g1, "g1")
    g2 = _exprs(g2, "g2")
    if len(g1) != len(g2):
        raise ValueError(f"g1 has {len(g1)} components, g2 has {len(g2)}")
    diff = [subtract(a, b) for a, b in zip(g1, g2)]
    return c1_norm_over_ball(diff, radius, seed=seed).value


@dataclass
class SensitivityReport:
    g_distance: float
    lhs: float
    rhs: float
    margin: float
    sigma_used: float
    M_used: float
    p1p2_bound: float
    eta_gap: float
    eta_bound: float
    trace1: IterationTrace
    trace2: IterationTrace

    @property
    def holds(self):
        """Continuity bound within its discretization allowance"""
        return self.lhs <= self.rhs + BOUND_SLACK * (1 + self.rhs)

    def to_dict(self):
        out = {
            key: float(getattr(self, key))
            for key in (
                "g_distance",
                "lhs",
                "rhs",
                "margin",
                "sigma_used",
                "M_used",
                "p1p2_bound",
                "eta_gap",
                "eta_bound",
            )
        }
        out["holds"] = self.holds
        out["iterations"] = [len(self.trace1), len(self.trace2)]
        return out

    def to_frame(self):
        data = self.to_dict()
        data.pop("iterations")
        return DataFrame({"value": data}).rename_axis("quantity")


def _shared_certificates(p, g1, g2, seed):
    """Certify both problems under the larger of their two M values"""
    p1 = replace(p, nonlinearity=g1)
    p2 = replace(p, nonlinearity=g2)
    M = max(certify(p1, seed=seed).M, certify(p2, seed=seed).M)
    p1 = replace(p1, M_override=M)
    p2 = replace(p2, M_override=M)
    cert1 = certify(p1, seed=seed)
    cert2 = certify(p2, seed=seed)
    for cert in (cert1, cert2):
        if not cert.ok:
            raise CertificationError(cert)
    return p1, p2, cert1, cert2


def compare_g(
    p, g1, g2, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, seed=0, threads=1
):
    """
    Solve with two nonlinearities and test the continuity bound

    Parameters
    ----------
    p : ProblemSpec
        Supplies everything but the nonlinearity.
    g1, g2 : sequence of Expr or str
    tol : float, default 1e-10
    max_iter : int, default 10000
    seed : None, int or numpy.random.Generator, default 0
    threads : int, default 1

    Returns
    -------
    SensitivityReport

    Raises
    ------
    CertificationError
        When either problem fails under the shared M.
    ConvergenceError
        When either solve fails.
    """
    g1 = _exprs(g1, "g1")
    g2 = _exprs(g2, "g2")
    p1, p2, cert1, cert2 = _shared_certificates(p, g1, g2, seed)
    sol1 = solve(p1, cert1, tol=tol, max_iter=max_iter, threads=threads)
    sol2 = solve(p2, cert2, tol=tol, max_iter=max_iter, threads=threads)

    sigma = cert1.sigma
    M = cert1.M
    scale_u0 = cert1.u0_h1 + 1.0
    g_distance = c1_distance(g1, g2, cert1.ball_radius, seed=seed)
    lhs = norm_h1_vector(sol1.u_p - sol2.u_p)
    if M > 0:
        rhs = sigma / (2.0 * M * (1.0 - sigma)) * scale_u0 * g_distance
    else:
        rhs = 0.0
    p1p2_bound = p.c_a / (1.0 - sigma) * scale_u0**2 * cert1.Q * g_distance

    tau1 = TauMap(p1, threads=threads)
    v2 = sol2.u_p.values
    eta_gap = tau1.norm(tau1(v2) - v2)
    eta_bound = p.c_a * cert1.Q * scale_u0**2 * g_distance

    report = SensitivityReport(
        g_distance=g_distance,
        lhs=lhs,
        rhs=rhs,
        margin=rhs - lhs,
        sigma_used=sigma,
        M_used=M,
        p1p2_bound=p1p2_bound,
        eta_gap=eta_gap,
        eta_bound=eta_bound,
        trace1=sol1.trace,
        trace2=sol2.trace,
    )
    logger.info(
        "continuity: |u1 - u2| = %.6g, bound %.6g, margin %.3g", lhs, rhs, rhs - lhs
    )
    return report


def sensitivity_sweep(
    p, g=None, epsilons=(0.02, 0.01, 0.005), tol=DEFAULT_TOL, seed=0, threads=1
):
    """
    Compare ``g`` with ``(1 + eps) g`` for several eps

    Returns
    -------
    frame : DataFrame
        Columns eps, lhs, rhs, margin.
    slope : float
        Least squares slope of log(lhs) against log(eps); close to 1 when the
        solution moves linearly with the perturbation.
    """
    g = _exprs(p.nonlinearity if g is None else g, "g")
    rows = []
    for eps in epsilons:
        g2 = tuple(scale(gm, 1.0 + eps) for gm in g)
        report = compare_g(p, g, g2, tol=tol, seed=seed, threads=threads)
        rows.append((eps, report.lhs, report.rhs, report.margin))
    frame = DataFrame(rows, columns=["eps", "lhs", "rhs", "margin"])
    positive = frame[frame["lhs"] > 0]
    if len(positive) >= 2:
        fit = np.polyfit(np.log(positive["eps"]), np.log(positive["lhs"]), 1)
        slope = float(fit[0])
    else:
        slope = float("nan")
    return frame, slope
