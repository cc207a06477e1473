import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from carnotmv import (
    DegenerateGradientError,
    DomainError,
    beta,
    c_constant,
    c_heisenberg1,
    c_step2,
    dirichlet_integral,
    expansion_coefficient,
    log_gamma,
    moment_I_closed,
    theta_prime_sequence,
    theta_sequence,
    theta_sequence_by_recursion,
)

strata = st.lists(st.integers(min_value=1, max_value=4), min_size=1, max_size=5)


class TestLogGamma:
    def test_fixtures(self):
        assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-15)
        assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-13)
        assert log_gamma(6.0) == pytest.approx(math.log(120.0), rel=1e-13)

    @pytest.mark.parametrize("t", [0.0, -1.0, -0.5])
    def test_domain(self, t):
        with pytest.raises(DomainError):
            log_gamma(t)


class TestBeta:
    def test_fixtures(self):
        assert beta(1.0, 1.0) == pytest.approx(1.0, rel=1e-14)
        assert beta(0.5, 0.5) == pytest.approx(math.pi, rel=1e-13)
        assert beta(2.0, 3.0) == pytest.approx(1.0 / 12.0, rel=1e-13)

    def test_symmetry(self):
        assert beta(2.3, 4.1) == beta(4.1, 2.3)

    def test_domain(self):
        with pytest.raises(DomainError):
            beta(0.0, 1.0)
        with pytest.raises(DomainError):
            beta(1.0, -2.0)


class TestDirichletIntegral:
    def test_quarter_disk(self):
        assert dirichlet_integral([0.0, 0.0]) == pytest.approx(math.pi / 4.0, rel=1e-14)

    def test_one_dimensional_antiderivative(self):
        # n=1, alpha = p-2 gives 1/(p-1); at p=3 the integral of x on (0,1) is 1/2
        assert dirichlet_integral([1.0]) == pytest.approx(0.5, rel=1e-14)

    def test_spherical_shell_oracle(self):
        # int_{T_3} x1^2 dx = (1/3) int_ball |x|^2 / 8 = (1/24) int_0^1 4 pi r^4 dr
        oracle, _ = quad(lambda r: 4.0 * math.pi * r**4, 0.0, 1.0)
        oracle /= 24.0
        assert oracle == pytest.approx(math.pi / 30.0, rel=1e-12)
        assert dirichlet_integral([2.0, 0.0, 0.0]) == pytest.approx(oracle, rel=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            dirichlet_integral([-1.0, 0.0])
        with pytest.raises(DomainError):
            dirichlet_integral([])


class TestThetaSequences:
    def test_fixtures(self):
        assert theta_sequence(2.0, (2, 1)) == [2.0]
        assert theta_sequence(3.0, (2, 1)) == [3.0]
        # layers (3,2,1), p=2: theta_3 = (0 + 3 + 4)/2
        assert theta_sequence(2.0, (3, 2, 1))[1] == pytest.approx(3.5, rel=1e-15)

    def test_empty_for_step_one(self):
        assert theta_sequence(2.5, (4,)) == []
        assert theta_sequence_by_recursion(2.5, (4,)) == []

    @settings(max_examples=100, deadline=None)
    @given(layers=strata, p=st.floats(min_value=1.0001, max_value=50.0))
    def test_recursion_matches_closed_form(self, layers, p):
        closed = theta_sequence(p, layers)
        rec = theta_sequence_by_recursion(p, layers)
        assert len(closed) == len(layers) - 1
        for a, b in zip(closed, rec):
            assert a == pytest.approx(b, rel=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(layers=strata, p=st.floats(min_value=1.0001, max_value=40.0))
    def test_shift_identity(self, layers, p):
        assert theta_prime_sequence(p, layers) == theta_sequence(p + 2.0, layers)

    def test_prime_fixtures(self):
        assert theta_prime_sequence(2.0, (2, 1)) == [4.0]
        assert theta_prime_sequence(3.0, (2, 1)) == [5.0]

    def test_domain(self):
        with pytest.raises(DomainError):
            theta_sequence(1.0, (2, 1))
        with pytest.raises(DomainError):
            theta_sequence(math.inf, (2, 1))


class TestCConstant:
    def test_euclidean_closed_form(self):
        report = c_constant(2.0, (3,))
        assert report.branch == "euclidean_closed_form"
        assert report.c_value == pytest.approx(0.1, rel=1e-14)
        assert report.theta == ()

    def test_h1_value_against_gamma_expression(self):
        # 2/((p+2)(p+4)) (Gamma((p+6)/4)/Gamma((p+4)/4))^2 at p=2, using
        # Gamma(2)=1 and Gamma(3/2)=sqrt(pi)/2, equals 1/(3 pi)
        direct = 2.0 / (4.0 * 6.0) * (math.gamma(2.0) / math.gamma(1.5)) ** 2
        assert direct == pytest.approx(1.0 / (3.0 * math.pi), rel=1e-14)
        report = c_constant(2.0, (2, 1))
        assert report.branch == "general_beta_product"
        assert report.c_value == pytest.approx(1.0 / (3.0 * math.pi), rel=1e-13)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 7.0, 20.0])
    def test_matches_h1_closed_form(self, p):
        assert c_constant(p, (2, 1)).c_value == pytest.approx(c_heisenberg1(p), rel=1e-12)

    def test_infinity_branch(self):
        report = c_constant(math.inf, (2, 1))
        assert report.branch == "p_infinity"
        assert report.c_value == 0.5
        assert report.theta == () and report.theta_prime == ()

    @pytest.mark.parametrize("p", [1.0, 0.5, -2.0])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            c_constant(p, (2, 1))

    @pytest.mark.parametrize("layers", [(2, 1), (2, 2, 1)])
    def test_strictly_decreasing_in_p(self, layers):
        grid = np.linspace(1.1, 30.0, 80)
        values = [c_constant(p, layers).c_value for p in grid]
        assert all(a > b > 0 for a, b in zip(values, values[1:]))

    def test_report_json_dict(self):
        d = c_constant(3.0, (2, 1)).to_json_dict()
        assert d["branch"] == "general_beta_product"
        assert d["layers"] == [2, 1]
        assert len(d["theta"]) == 1


class TestCHeisenberg1:
    def test_p2_value(self):
        assert c_heisenberg1(2.0) == pytest.approx(1.0 / (3.0 * math.pi), rel=1e-13)

    def test_large_p_limit(self):
        # (p-2) c(p) -> 1/2 with O(1/p) error
        assert (1e3 - 2) * c_heisenberg1(1e3) == pytest.approx(0.5, abs=1e-2)
        assert (1e6 - 2) * c_heisenberg1(1e6) == pytest.approx(0.5, abs=1e-5)


class TestCStep2:
    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 7.0, 10.0])
    def test_reduces_to_h1(self, p):
        assert c_step2(p, 2, 1) == pytest.approx(c_heisenberg1(p), rel=1e-12)

    def test_p2_value(self):
        assert c_step2(2.0, 2, 1) == pytest.approx(1.0 / (3.0 * math.pi), rel=1e-13)

    @settings(max_examples=60, deadline=None)
    @given(
        p=st.floats(min_value=1.1, max_value=25.0),
        n=st.integers(min_value=1, max_value=6),
        k=st.integers(min_value=1, max_value=6),
    )
    def test_matches_general_constant(self, p, n, k):
        assert c_step2(p, n, k) == pytest.approx(c_constant(p, (n, k)).c_value, rel=1e-12)


class TestMomentI:
    def test_unit_disk_area(self):
        assert moment_I_closed(2.0, (2,)) == pytest.approx(math.pi, rel=1e-14)

    def test_h1_volume_slice_oracle(self):
        # |B| = int_{-1}^{1} pi sqrt(1-t^2) dt = pi^2/2
        oracle, _ = quad(lambda t: math.pi * math.sqrt(1.0 - t * t), -1.0, 1.0)
        assert moment_I_closed(2.0, (2, 1)) == pytest.approx(oracle, rel=1e-10)
        assert moment_I_closed(2.0, (2, 1)) == pytest.approx(math.pi**2 / 2.0, rel=1e-14)

    def test_domain(self):
        with pytest.raises(DomainError):
            moment_I_closed(1.0, (2, 1))


class TestExpansionCoefficient:
    def test_identity_matrix(self):
        for p in (1.5, 2.0, 4.0):
            got = expansion_coefficient(p, np.eye(2), np.array([0.3, -0.4]), (2, 1))
            want = c_constant(p, (2, 1)).c_value * (2.0 + p - 2.0)
            assert got == pytest.approx(want, rel=1e-13)

    def test_p2_ignores_direction(self):
        A = np.array([[1.0, 0.5], [0.5, -2.0]])
        a = expansion_coefficient(2.0, A, np.array([1.0, 0.0]), (2, 1))
        b = expansion_coefficient(2.0, A, np.array([0.2, 5.0]), (2, 1))
        assert a == pytest.approx(b, rel=1e-13)
        assert a == pytest.approx(c_constant(2.0, (2, 1)).c_value * np.trace(A), rel=1e-13)

    def test_infinity_case(self):
        got = expansion_coefficient(math.inf, np.diag([2.0, 0.0]), np.array([1.0, 0.0]), (2, 1))
        assert got == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize("lam", [2.0, -3.0, 0.1])
    def test_gradient_scale_invariance(self, lam):
        A = np.array([[1.0, 0.2], [0.2, 0.7]])
        xi = np.array([0.6, -1.1])
        a = expansion_coefficient(3.0, A, xi, (2, 1))
        b = expansion_coefficient(3.0, A, lam * xi, (2, 1))
        assert a == pytest.approx(b, rel=1e-13)

    def test_zero_gradient_rejected(self):
        with pytest.raises(DegenerateGradientError):
            expansion_coefficient(3.0, np.eye(2), np.zeros(2), (2, 1))

    def test_asymmetric_matrix_rejected(self):
        with pytest.raises(DomainError):
            expansion_coefficient(3.0, np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([1.0, 0.0]), (2, 1))
