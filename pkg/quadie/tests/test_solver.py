from dataclasses import replace
import math

import numpy as np
import pytest

from quadie.conftest import make_problem
from quadie.convolve import convolve_fft
from quadie.exceptions import (
    CertificationError,
    ContractionWarning,
    ConvergenceError,
    DivergenceError,
)
from quadie.exprlang import parse
from quadie.grid import VectorGridFunction, make_grid, sample
from quadie.norms import norm_h1_vector, norm_l2
from quadie.problem import ProblemSpec, certify
from quadie.solver import (
    IterationTrace,
    TauMap,
    apply_tau,
    contraction_probe,
    eval_g,
    linear_regime_series,
    random_ball_point,
    residual,
    solve,
    uniqueness_probe,
)


@pytest.fixture(scope="module")
def reference_solution(reference_problem, reference_certificate):
    return solve(reference_problem, reference_certificate)


@pytest.fixture(scope="module")
def linear_problem():
    return make_problem(multiplier="1", g="0.01*u1")


class TestTrace:
    def test_ratios(self):
        trace = IterationTrace()
        for delta in (1.0, 0.5, 0.25, 0.5):
            trace.record(delta, 1.0)
        assert len(trace) == 4
        assert math.isnan(trace.ratio[0])
        assert trace.ratio[1:] == [0.5, 0.5, 2.0]
        assert trace.growing_steps() == 1
        assert trace.max_ratio() == 2.0

    def test_floor(self):
        trace = IterationTrace()
        for delta in (1.0, 1e-14, 1e-15):
            trace.record(delta, 1.0)
        assert math.isnan(trace.max_ratio())

    def test_frame(self):
        trace = IterationTrace()
        trace.record(1.0, 0.0)
        frame = trace.to_frame()
        assert list(frame.columns) == ["k", "delta", "ratio", "norm"]
        assert trace.to_csv().splitlines()[0] == "k,delta,ratio,norm"


class TestTauMap:
    def test_eval_g(self):
        grid = make_grid(10, 64)
        values = np.array([np.ones(64), np.full(64, 2.0)])
        w = VectorGridFunction.from_array(grid, values)
        out = eval_g([parse("u1*u2"), parse("u2^2")], w)
        np.testing.assert_array_equal(out.values[0], 2.0)
        np.testing.assert_array_equal(out.values[1], 4.0)

    def test_image_of_zero(self, reference_problem, reference_certificate):
        p = reference_problem
        zero = VectorGridFunction.zeros(p.grid, 1)
        image = apply_tau(p, reference_certificate, zero)
        u0 = p.u0[0]
        K = p.kernel_samples[0]
        expected = 0.02 * u0 * convolve_fft(K, u0 * u0)
        np.testing.assert_allclose(image[0].values, expected.values, atol=1e-18)

    def test_requires_certificate(self):
        p = make_problem(multiplier="1", n=1024)
        cert = certify(p)
        with pytest.raises(CertificationError):
            apply_tau(p, cert, VectorGridFunction.zeros(p.grid, 1))

    def test_outside_ball(self, reference_problem, reference_certificate):
        p = reference_problem
        big = VectorGridFunction([sample(parse("2*exp(-x^2)"), p.grid)])
        with pytest.raises(ValueError):
            apply_tau(p, reference_certificate, big)

    def test_threads(self, reference_problem):
        v = random_ball_point(reference_problem.grid, 1, 1.0, seed=2).values
        single = TauMap(reference_problem)(v)
        threaded = TauMap(reference_problem, threads=2)(v)
        np.testing.assert_allclose(single, threaded, rtol=0, atol=1e-15)

    @pytest.mark.parametrize("seed", range(20))
    def test_maps_ball_into_ball(self, reference_problem, reference_certificate, seed):
        p = reference_problem
        v = random_ball_point(p.grid, 1, p.rho, seed=seed)
        assert norm_h1_vector(v) <= p.rho
        image = apply_tau(p, reference_certificate, v)
        assert norm_h1_vector(image) <= p.rho

    @pytest.mark.parametrize("seed", range(20))
    def test_growth_of_g(self, reference_problem, reference_certificate, seed):
        p = reference_problem
        cert = reference_certificate
        v = random_ball_point(p.grid, 1, p.rho, seed=seed)
        G = eval_g(p.nonlinearity, p.u0 + v)
        size = math.sqrt(sum(norm_l2(component) ** 2 for component in G))
        assert size <= cert.M * (cert.u0_h1 + 1)


class TestReference:
    def test_converges(self, reference_solution, reference_certificate):
        sol = reference_solution
        assert sol.converged
        assert sol.residual <= 1e-8
        assert sol.certificate is reference_certificate
        ratio = sol.max_ratio
        assert math.isnan(ratio) or ratio <= reference_certificate.sigma + 0.05

    def test_solution_in_ball(self, reference_problem, reference_solution):
        assert norm_h1_vector(reference_solution.u_p) <= reference_problem.rho
        u = reference_problem.u0 + reference_solution.u_p
        np.testing.assert_array_equal(u.values, reference_solution.u.values)

    def test_residual(self, reference_problem, reference_solution):
        assert residual(reference_problem, reference_solution.u) <= 1e-8

    def test_summary(self, reference_solution, reference_certificate):
        summary = reference_solution.summary()
        assert summary["converged"] is True
        assert summary["sigma"] == reference_certificate.sigma
        assert summary["iterations"] == len(reference_solution.trace)

    def test_contraction_probe(self, reference_problem, reference_certificate):
        ratio = contraction_probe(reference_problem, reference_certificate, trials=50)
        assert 0 < ratio <= reference_certificate.sigma + 0.05

    def test_restarts_agree(self, reference_problem, reference_certificate):
        gap = uniqueness_probe(reference_problem, reference_certificate, starts=5)
        assert gap <= 1e-7

    def test_geometric_decay(self, reference_solution, reference_certificate):
        delta = reference_solution.trace.delta
        rate = reference_certificate.sigma * 1.05
        for k, d in enumerate(delta):
            assert d <= rate**k * delta[0]

    def test_nontrivial(self, reference_problem, reference_solution):
        assert norm_h1_vector(reference_problem.u0) > 0
        assert norm_h1_vector(reference_solution.u) > 0
        assert norm_h1_vector(reference_solution.u_p) > 0


class TestFailures:
    def test_uncertified(self):
        with pytest.raises(CertificationError) as exc:
            solve(make_problem(multiplier="1", n=1024))
        assert not exc.value.certificate.rub_ok

    def test_max_iter(self, linear_problem):
        with pytest.raises(ConvergenceError) as exc:
            solve(linear_problem, max_iter=1)
        assert not isinstance(exc.value, DivergenceError)
        assert exc.value.solution is not None
        assert not exc.value.solution.converged
        assert len(exc.value.solution.trace) == 1

    def test_divergence(self):
        p = make_problem(multiplier="1", initial="exp(-x^2)", n=1024)
        with pytest.raises(DivergenceError) as exc:
            solve(p, force=True)
        trace = exc.value.solution.trace
        assert trace.growing_steps() >= 5 or not np.isfinite(trace.delta[-1])

    def test_start_outside_ball(self, reference_problem, reference_certificate):
        p = reference_problem
        start = VectorGridFunction([sample(parse("2*exp(-x^2)"), p.grid)])
        with pytest.raises(ValueError):
            solve(p, reference_certificate, initial=start)
        sol = solve(p, reference_certificate, initial=start, force=True)
        assert any("outside the ball" in note for note in sol.notes)

    def test_converged_outside_ball(self):
        p = make_problem(rho=1e-10)
        cert = certify(p)
        assert not cert.ok
        sol = solve(p, cert, force=True)
        assert sol.converged
        assert any(note.startswith("converged outside the ball") for note in sol.notes)

    def test_no_ball_note_inside(self, reference_problem, reference_certificate):
        sol = solve(reference_problem, reference_certificate)
        assert not any("outside the ball" in note for note in sol.notes)

    @pytest.mark.parametrize("kwargs", [{"tol": 0}, {"max_iter": 0}])
    def test_bad_arguments(self, reference_problem, reference_certificate, kwargs):
        with pytest.raises(ValueError):
            solve(reference_problem, reference_certificate, **kwargs)

    def test_contraction_warning(self, linear_problem):
        cert = replace(certify(linear_problem), sigma=-1.0)
        with pytest.warns(ContractionWarning):
            sol = solve(linear_problem, cert)
        assert any("contraction ratio" in note for note in sol.notes)


class TestOracles:
    def test_zero_nonlinearity(self):
        p = make_problem(g="0", n=1024)
        sol = solve(p, force=True)
        assert sol.converged
        assert "forced run on an uncertified problem" in sol.notes
        np.testing.assert_array_equal(sol.u.values, p.u0.values)

    def test_manufactured(self):
        grid = make_grid(20, 4096)
        exact = sample(parse("0.05*exp(-x^2)"), grid)
        K = sample(parse("exp(-abs(x))"), grid, centered=True)
        u0 = exact - exact * convolve_fft(K, exact * exact)
        p = ProblemSpec(
            N=1,
            grid=grid,
            kernels=(K,),
            multipliers=("1",),
            initial=(u0,),
            nonlinearity=("u1^2",),
            rho=1,
        )
        sol = solve(p, force=True)
        assert sol.converged
        assert norm_h1_vector(sol.u - VectorGridFunction([exact])) <= 1e-7

    def test_linear_series(self, linear_problem):
        sol = solve(linear_problem)
        series = linear_regime_series(linear_problem, 0.01)
        assert norm_h1_vector(sol.u - series) <= 1e-9

    def test_series_term_limit(self, linear_problem):
        with pytest.raises(ConvergenceError):
            linear_regime_series(linear_problem, 0.01, max_terms=2)


def test_random_ball_point():
    grid = make_grid(20, 1024)
    for seed in range(5):
        v = random_ball_point(grid, 2, 0.5, seed=seed)
        assert v.N == 2
        assert 0.05 - 1e-12 <= norm_h1_vector(v) <= 0.5 + 1e-12
