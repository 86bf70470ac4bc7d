import math

import numpy as np
import pytest

from quadie.exceptions import (
    ExprDomainError,
    StochasticEstimateWarning,
    TruncationWarning,
)
from quadie.exprlang import parse
from quadie.grid import (
    GridFunction,
    VectorGridFunction,
    make_grid,
    random_mixture,
    sample,
)
from quadie.norms import (
    C_ALGEBRA,
    EMBEDDING_CONSTANT,
    NormReport,
    algebra_defect,
    c1_norm_over_ball,
    embedding_ratio,
    norm_h1,
    norm_h1_vector,
    norm_l1,
    norm_l2,
    norm_linf,
    norm_report,
    norm_w11,
)

GAUSSIAN = parse("exp(-x^2)")
LAPLACE = parse("exp(-abs(x))")


@pytest.fixture(scope="module")
def grid():
    return make_grid(20, 4096)


@pytest.fixture(scope="module")
def gaussian(grid):
    return sample(GAUSSIAN, grid)


@pytest.fixture(scope="module")
def laplace(grid):
    return sample(LAPLACE, grid, centered=True)


class TestAnalytic:
    @pytest.mark.parametrize(
        "norm, expected, tol",
        [
            (norm_l2, (math.pi / 2) ** 0.25, 1e-6),
            (norm_l1, math.sqrt(math.pi), 1e-6),
            (norm_h1, math.sqrt(2 * math.sqrt(math.pi / 2)), 1e-4),
            (norm_w11, math.sqrt(math.pi) + 2, 1e-4),
            (norm_linf, 1.0, 1e-4),
        ],
    )
    def test_gaussian(self, grid, norm, expected, tol):
        f = sample(GAUSSIAN, grid, centered=True)
        assert abs(norm(f) - expected) <= tol

    @pytest.mark.parametrize(
        "norm, expected, tol",
        [
            (norm_l2, 1.0, 1e-3),
            (norm_l1, 2.0, 1e-3),
            (norm_h1, math.sqrt(2), 2e-2),
            (norm_w11, 4.0, 2e-2),
        ],
    )
    def test_laplace(self, laplace, norm, expected, tol):
        assert abs(norm(laplace) - expected) <= tol

    def test_linf_at_center_lag(self, laplace):
        assert norm_linf(laplace) == 1.0

    def test_linf_without_center_node(self, grid):
        # no node at 0 on an even grid
        f = sample(LAPLACE, grid)
        assert norm_linf(f) == pytest.approx(math.exp(-grid.h / 2), rel=1e-12)

    @pytest.mark.parametrize("norm", [norm_l1, norm_l2, norm_linf, norm_h1, norm_w11])
    def test_zero(self, grid, norm):
        assert norm(GridFunction(grid, np.zeros(grid.n))) == 0

    def test_orderings(self, grid):
        for seed in range(20):
            f = random_mixture(grid, seed)
            assert norm_h1(f) >= norm_l2(f)
            assert norm_w11(f) >= norm_l1(f)


class TestVectorNorm:
    def test_identical_components(self, grid, gaussian):
        u = VectorGridFunction([gaussian, gaussian])
        assert norm_h1_vector(u) == pytest.approx(math.sqrt(2) * norm_h1(gaussian))

    def test_zero_component(self, grid, gaussian):
        u = VectorGridFunction([gaussian, GridFunction(grid, np.zeros(grid.n))])
        assert norm_h1_vector(u) == pytest.approx(norm_h1(gaussian), rel=1e-14)

    def test_type(self, gaussian):
        with pytest.raises(TypeError):
            norm_h1_vector(gaussian)


class TestRefinement:
    def test_h1_second_order(self):
        exact = math.sqrt(2 * math.sqrt(math.pi / 2))
        errors = [
            abs(norm_h1(sample(GAUSSIAN, make_grid(20, n))) - exact)
            for n in (256, 512, 1024)
        ]
        for coarse, fine in zip(errors, errors[1:]):
            assert coarse / fine >= 3

    def test_w11_laplace_converges(self):
        errors = [
            abs(norm_w11(sample(LAPLACE, make_grid(20, n), centered=True)) - 4)
            for n in (512, 1024, 2048)
        ]
        assert errors[0] > errors[1] > errors[2]


class TestReport:
    def test_all(self, gaussian):
        report = norm_report(gaussian)
        assert set(report.to_dict()) == {"l1", "l2", "linf", "h1", "w11"}
        assert report.h1 == norm_h1(gaussian)

    def test_subset(self, gaussian):
        report = norm_report(gaussian, which=("l2",))
        assert report.to_dict() == {"l2": norm_l2(gaussian)}
        assert report.to_text().startswith("l2 = 1.1195")

    def test_unknown(self, gaussian):
        with pytest.raises(ValueError):
            norm_report(gaussian, which=("h2",))

    def test_invalid_entry(self):
        with pytest.raises(ValueError):
            NormReport(l2=-1.0)


class TestC1Norm:
    def test_zero(self):
        assert c1_norm_over_ball([parse("0")], 1.0).value == 0

    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_linear(self, r):
        est = c1_norm_over_ball([parse("u1")], r)
        assert est.value == pytest.approx(r + 1, rel=1e-12)
        assert not est.lower_estimate

    def test_quadratic(self):
        est = c1_norm_over_ball([parse("u1^2")], 1.0)
        assert est.value == pytest.approx(3.0, rel=1e-12)
        np.testing.assert_allclose(est.sup_values, [1.0])
        np.testing.assert_allclose(est.sup_gradients, [[2.0]])

    def test_two_dimensional(self):
        g = [parse("u1*u2"), parse("u1^2 + u2^2")]
        with pytest.warns(StochasticEstimateWarning):
            est = c1_norm_over_ball(g, 1.0, seed=0)
        # sups: 1/2 + 1 + 1 for u1*u2, 1 + 2 + 2 for the sum of squares
        assert est.lower_estimate
        assert est.value == pytest.approx(7.5, rel=1e-6)
        assert est.value <= 7.5 + 1e-12

    def test_seeded(self):
        g = [parse("sin(3*u1)*u2"), parse("u2")]
        with pytest.warns(StochasticEstimateWarning):
            a = c1_norm_over_ball(g, 0.8, seed=4)
            b = c1_norm_over_ball(g, 0.8, seed=4)
        assert a.value == b.value

    def test_domain(self):
        with pytest.raises(ExprDomainError):
            c1_norm_over_ball([parse("log(u1)")], 1.0)

    def test_bad_radius(self):
        with pytest.raises(ValueError):
            c1_norm_over_ball([parse("u1")], 0.0)

    def test_unknown_variable(self):
        with pytest.raises(ValueError):
            c1_norm_over_ball([parse("u2")], 1.0)


class TestEmbedding:
    def test_sharp_witness(self, grid):
        ratio = embedding_ratio(sample(LAPLACE, grid))
        assert abs(ratio - EMBEDDING_CONSTANT) <= 2e-2

    def test_gaussian(self, gaussian):
        ratio = embedding_ratio(gaussian)
        assert ratio == pytest.approx(1 / 1.58324, abs=1e-4)
        assert ratio < EMBEDDING_CONSTANT

    def test_constant_flagged(self, grid):
        with pytest.warns(TruncationWarning):
            embedding_ratio(sample(parse("1"), grid))

    def test_zero(self, grid):
        with pytest.raises(ValueError):
            embedding_ratio(GridFunction(grid, np.zeros(grid.n)))

    def test_random_mixtures(self, grid):
        rng = np.random.default_rng(1)
        for _ in range(20):
            ratio = embedding_ratio(random_mixture(grid, rng))
            assert ratio <= EMBEDDING_CONSTANT + 1e-3


class TestAlgebra:
    def test_zero(self, grid):
        zero = GridFunction(grid, np.zeros(grid.n))
        assert algebra_defect(zero, zero) <= 0

    def test_gaussians(self, gaussian):
        assert algebra_defect(gaussian, gaussian, C_ALGEBRA) < 0

    def test_mixed(self, gaussian, grid):
        assert algebra_defect(gaussian, sample(LAPLACE, grid)) < 0

    def test_small_constant_breaks(self, gaussian):
        assert algebra_defect(gaussian, gaussian, c_a=0.1) > 0
