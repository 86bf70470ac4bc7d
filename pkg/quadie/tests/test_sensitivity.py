import math

import pytest

from quadie.exceptions import CertificationError
from quadie.exprlang import parse
from quadie.sensitivity import c1_distance, compare_g, sensitivity_sweep

G = ("u1^2",)


class TestDistance:
    def test_scaled(self):
        # 0.02 * (sup u^2 + sup |2u|) on [-1, 1]
        assert c1_distance(G, ("1.02*u1^2",), 1.0) == pytest.approx(0.06, rel=1e-9)

    def test_identical(self):
        assert c1_distance(G, [parse("u1^2")], 0.5) == 0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            c1_distance(G, ("u1^2", "u2"), 1.0)


class TestCompare:
    @pytest.mark.parametrize("eps", [0.02, 0.01, 0.005])
    def test_bound_holds(self, reference_problem, eps):
        report = compare_g(reference_problem, G, (f"{1 + eps}*u1^2",))
        assert report.holds
        assert 0 < report.lhs <= report.rhs
        assert report.margin == report.rhs - report.lhs
        assert report.sigma_used < 1

    def test_symmetric(self, reference_problem):
        forward = compare_g(reference_problem, G, ("1.01*u1^2",))
        backward = compare_g(reference_problem, ("1.01*u1^2",), G)
        assert abs(forward.lhs - backward.lhs) <= 1e-12
        assert forward.g_distance == pytest.approx(backward.g_distance, rel=1e-12)
        assert forward.M_used == pytest.approx(backward.M_used, rel=1e-12)

    def test_identities(self, reference_problem):
        report = compare_g(reference_problem, G, ("1.01*u1^2",))
        assert report.p1p2_bound == pytest.approx(report.rhs, rel=1e-12)
        sigma = report.sigma_used
        assert (1 - sigma) * report.lhs <= report.eta_gap * (1 + 1e-6) + 1e-15
        assert report.eta_gap <= report.eta_bound

    def test_shared_M(self, reference_problem, reference_certificate):
        report = compare_g(reference_problem, G, ("1.02*u1^2",))
        assert report.M_used == pytest.approx(1.02 * reference_certificate.M, rel=1e-3)
        assert report.sigma_used > reference_certificate.sigma

    def test_same_nonlinearity(self, reference_problem):
        report = compare_g(reference_problem, G, G)
        assert report.g_distance == 0
        assert report.lhs == 0
        assert report.holds

    def test_uncertified(self, reference_problem):
        with pytest.raises(CertificationError) as exc:
            compare_g(reference_problem, G, ("100*u1^2",))
        assert not exc.value.certificate.ok

    def test_to_dict(self, reference_problem):
        report = compare_g(reference_problem, G, ("1.01*u1^2",))
        doc = report.to_dict()
        assert doc["holds"] is True
        assert len(doc["iterations"]) == 2
        frame = report.to_frame()
        assert frame.index.name == "quantity"
        assert "iterations" not in frame.index
        assert list(report.trace1.to_frame().columns) == ["k", "delta", "ratio", "norm"]


@pytest.mark.slow
def test_sweep_is_linear(reference_problem):
    frame, slope = sensitivity_sweep(reference_problem)
    assert list(frame.columns) == ["eps", "lhs", "rhs", "margin"]
    assert (frame["margin"] > 0).all()
    assert not math.isnan(slope)
    assert slope == pytest.approx(1.0, abs=0.05)
