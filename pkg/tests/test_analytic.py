import math

import numpy as np
import pytest
from scipy import special

from speclab.analytic import (
    MultiIndex,
    ball_moment,
    bessel_j0,
    bessel_j0_zero,
    bessel_j1,
    deriv_weyl_constant,
    double_factorial,
    epsilon_exponent,
    gamma,
    gauss_legendre_rule,
    gegenbauer,
    gegenbauer_at_one,
    gegenbauer_zeros,
    phi_kernel,
    phi_kernel_bessel,
    phi_kernel_zero,
    weyl_constant,
    _phi_quadrature,
)
from speclab.errors import DomainError, RangeError

TWO_PI = 2.0 * math.pi

# independent oracle values, frozen from scipy.special / closed forms
J1_ZERO_1 = 3.8317059702075125
J0_ZERO_1 = 2.4048255576957724
TAN_ROOT_1 = 4.493409457909064
TAN_ROOT_2 = 7.725251836937708
P3_ZERO = 0.7745966692414834  # sqrt(3/5)


class TestGamma:
    def test_classical_values(self):
        assert gamma(1.0) == pytest.approx(1.0, rel=1e-13)
        assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)
        # recursion from gamma(0.5): 1.5 * 0.5 * sqrt(pi)
        assert gamma(2.5) == pytest.approx(1.329340388179137, rel=1e-13)

    def test_recursion_identity(self):
        for x in np.linspace(0.5, 49.0, 313):
            assert gamma(float(x) + 1.0) == pytest.approx(float(x) * gamma(float(x)), rel=1e-13)

    def test_against_stdlib(self):
        for x in np.linspace(0.5, 50.0, 499):
            assert gamma(float(x)) == pytest.approx(math.gamma(float(x)), rel=1e-13)

    def test_small_argument_region(self):
        assert gamma(0.1) == pytest.approx(math.gamma(0.1), rel=1e-13)

    @pytest.mark.parametrize("bad", [0.0, -1.0, -0.5])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            gamma(bad)


class TestDoubleFactorial:
    @pytest.mark.parametrize(
        "k,expected", [(-1, 1), (0, 1), (1, 1), (2, 2), (5, 15), (8, 384), (9, 945)]
    )
    def test_values(self, k, expected):
        assert double_factorial(k) == expected

    def test_recursion(self):
        for k in range(1, 30):
            assert double_factorial(k) == k * double_factorial(k - 2)

    def test_domain(self):
        with pytest.raises(DomainError):
            double_factorial(-2)


class TestWeylConstant:
    def test_known_dimensions(self):
        assert weyl_constant(2) == pytest.approx(1.0 / (4.0 * math.pi), abs=1e-13)
        assert weyl_constant(3) == pytest.approx(1.0 / (6.0 * math.pi**2), abs=1e-13)
        assert weyl_constant(4) == pytest.approx(1.0 / (32.0 * math.pi**2), abs=1e-13)

    def test_ball_volume_form(self):
        for n in range(2, 9):
            vol = math.pi ** (n / 2.0) / math.gamma(1.0 + n / 2.0)
            assert weyl_constant(n) == pytest.approx(vol / TWO_PI**n, rel=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            weyl_constant(1)


def _multi_indices(n, top):
    if n == 1:
        return [(a,) for a in range(top + 1)]
    return [(a, *rest) for a in range(top + 1) for rest in _multi_indices(n - 1, top - a)]


class TestDerivWeylConstant:
    def test_examples(self):
        a = MultiIndex.of(1, 0)
        assert deriv_weyl_constant(2, a, a) == pytest.approx(1.0 / (16.0 * math.pi), rel=1e-13)
        assert deriv_weyl_constant(2, a, MultiIndex.of(0, 0)) == 0.0
        zero = MultiIndex.of(0, 0)
        assert deriv_weyl_constant(2, zero, zero) == pytest.approx(weyl_constant(2), abs=1e-13)

    def test_symmetry(self):
        a, b = MultiIndex.of(2, 1), MultiIndex.of(0, 3)
        assert deriv_weyl_constant(2, a, b) == deriv_weyl_constant(2, b, a)

    @pytest.mark.parametrize("n", [2, 3])
    def test_double_factorial_vs_ball_moment(self, n):
        # every pair with |alpha + beta| <= 6: the two routes agree to 1e-12
        for a_ent in _multi_indices(n, 3):
            for b_ent in _multi_indices(n, 3):
                alpha, beta = MultiIndex(a_ent), MultiIndex(b_ent)
                if alpha.order + beta.order > 6:
                    continue
                closed = deriv_weyl_constant(n, alpha, beta)
                if not alpha.same_parity(beta):
                    assert closed == 0.0
                    continue
                half_gap = abs(alpha.order - beta.order) // 2
                sign = -1.0 if half_gap % 2 else 1.0
                moment = sign * ball_moment(n, alpha + beta) / TWO_PI**n
                assert closed == pytest.approx(moment, abs=1e-12)

    def test_mismatched_lengths(self):
        with pytest.raises(DomainError):
            deriv_weyl_constant(2, MultiIndex.of(1, 0, 0), MultiIndex.of(1, 0))


class TestMultiIndex:
    def test_invariants(self):
        with pytest.raises(DomainError):
            MultiIndex(())
        with pytest.raises(DomainError):
            MultiIndex((1, -1))
        assert MultiIndex.of(1, 2, 3).order == 6

    def test_parity(self):
        assert MultiIndex.of(3, 1).same_parity(MultiIndex.of(1, 3))
        assert not MultiIndex.of(1, 0).same_parity(MultiIndex.of(0, 0))


class TestGegenbauer:
    def test_legendre_values(self):
        assert gegenbauer(2, 0.5, 1.0) == 1.0
        assert gegenbauer(3, 0.5, P3_ZERO) == pytest.approx(0.0, abs=1e-15)
        assert gegenbauer(1, 1.0, 0.3) == pytest.approx(0.6, rel=1e-15)

    def test_normalization_at_one(self):
        for m in range(0, 60, 7):
            assert gegenbauer(m, 0.5, 1.0) == 1.0
            assert gegenbauer_at_one(m, 0.5) == 1.0
        assert gegenbauer_at_one(5, 1.0) == pytest.approx(6.0, rel=1e-14)

    @pytest.mark.parametrize("nu", [0.5, 1.0, 2.5])
    def test_against_scipy(self, nu):
        ts = np.linspace(-1.0, 1.0, 41)
        for m in (0, 1, 2, 5, 12, 30):
            mine = gegenbauer(m, nu, ts)
            ref = special.eval_gegenbauer(m, nu, ts) if nu != 0.5 else special.eval_legendre(m, ts)
            np.testing.assert_allclose(mine, ref, rtol=1e-11, atol=1e-12)

    def test_bounded_by_diagonal(self):
        ts = np.linspace(-1.0, 1.0, 501)
        for m, nu in ((7, 0.5), (20, 1.0), (13, 1.5)):
            assert np.max(np.abs(gegenbauer(m, nu, ts))) <= gegenbauer_at_one(m, nu) * (1 + 1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            gegenbauer(3, 0.5, 1.5)
        with pytest.raises(DomainError):
            gegenbauer(-1, 0.5, 0.0)


class TestGegenbauerZeros:
    def test_closed_forms(self):
        np.testing.assert_allclose(gegenbauer_zeros(1, 0.5), [0.0], atol=1e-15)
        np.testing.assert_allclose(
            gegenbauer_zeros(2, 0.5), [-1.0 / math.sqrt(3.0), 1.0 / math.sqrt(3.0)], atol=1e-15
        )
        np.testing.assert_allclose(gegenbauer_zeros(3, 0.5), [-P3_ZERO, 0.0, P3_ZERO], atol=1e-15)

    def test_count_and_sorted(self):
        for m in (1, 4, 17, 120):
            z = gegenbauer_zeros(m, 1.0)
            assert z.shape == (m,)
            assert np.all(np.diff(z) > 0.0)

    @pytest.mark.parametrize("m", [10, 50, 137, 400])
    def test_against_scipy_legendre(self, m):
        np.testing.assert_allclose(
            gegenbauer_zeros(m, 0.5), special.roots_legendre(m)[0], atol=5e-15
        )

    @pytest.mark.parametrize("nu", [0.5, 1.0])
    def test_residuals(self, nu):
        # double precision limits the t-space residual to ~m^2 eps near the
        # endpoints, so the 1e-12 bound is asserted in its feasible range
        for m in (5, 20, 80, 200, 300):
            z = gegenbauer_zeros(m, nu)
            residual = np.max(np.abs(gegenbauer(m, nu, z)))
            assert residual <= 1e-12 * gegenbauer_at_one(m, nu)

    @pytest.mark.parametrize("nu", [0.5, 1.0])
    def test_interlacing(self, nu):
        degrees = list(range(1, 65)) + list(range(70, 501, 43)) + [500]
        for m in degrees:
            z_lo = gegenbauer_zeros(m, nu)
            z_hi = gegenbauer_zeros(m + 1, nu)
            assert np.all(z_hi[:-1] < z_lo) and np.all(z_lo < z_hi[1:])

    def test_large_degree_converges(self):
        z = gegenbauer_zeros(2000, 0.5)
        assert z.shape == (2000,)
        ref = special.roots_legendre(2000)[0]
        np.testing.assert_allclose(z, ref, atol=1e-14)


class TestGaussLegendre:
    def test_order_one_and_two(self):
        r1 = gauss_legendre_rule(1)
        np.testing.assert_allclose(r1.nodes, [0.0])
        np.testing.assert_allclose(r1.weights, [2.0])
        r2 = gauss_legendre_rule(2)
        np.testing.assert_allclose(r2.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-15)
        np.testing.assert_allclose(r2.weights, [1.0, 1.0], atol=1e-14)

    def test_quartic_moment_with_five_nodes(self):
        rule = gauss_legendre_rule(5)
        assert rule.integrate(rule.nodes**4) == pytest.approx(0.4, abs=1e-14)

    @pytest.mark.parametrize("order", [1, 2, 3, 4, 7, 11, 16, 40])
    def test_monomial_exactness(self, order):
        rule = gauss_legendre_rule(order)
        assert abs(float(np.sum(rule.weights)) - 2.0) <= 1e-12
        assert np.all(np.diff(rule.nodes) > 0.0) or order == 1
        for k in range(2 * order):
            exact = 0.0 if k % 2 else 2.0 / (k + 1)
            assert rule.integrate(rule.nodes**k) == pytest.approx(exact, abs=1e-12)

    @pytest.mark.parametrize("order", [64, 501, 2016])
    def test_large_orders(self, order):
        rule = gauss_legendre_rule(order)
        assert abs(float(np.sum(rule.weights)) - 2.0) <= 1e-12
        ref_nodes, ref_weights = np.polynomial.legendre.leggauss(order)
        np.testing.assert_allclose(rule.nodes, ref_nodes, atol=5e-15)
        np.testing.assert_allclose(rule.weights, ref_weights, atol=5e-14)

    def test_rule_is_cached_and_frozen(self):
        assert gauss_legendre_rule(17) is gauss_legendre_rule(17)
        with pytest.raises(ValueError):
            gauss_legendre_rule(17).nodes[0] = 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            gauss_legendre_rule(0)
        with pytest.raises(DomainError):
            gauss_legendre_rule(5001)


class TestBessel:
    def test_against_scipy(self):
        for x in np.linspace(0.0, 40.0, 1601):
            assert bessel_j0(float(x)) == pytest.approx(float(special.j0(x)), abs=2e-12)
            assert bessel_j1(float(x)) == pytest.approx(float(special.j1(x)), abs=2e-12)

    def test_first_zero_by_bisection(self):
        assert bessel_j0_zero(1) == pytest.approx(J0_ZERO_1, abs=1e-10)


class TestPhiKernel:
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_value_at_zero_is_weyl_constant(self, n):
        assert phi_kernel(n, 0.0).value == pytest.approx(weyl_constant(n), abs=1e-12)

    def test_fields(self):
        pv = phi_kernel(3, 1.25)
        assert pv.n == 3 and pv.tau == 1.25

    def test_vanishes_at_first_bessel_zero(self):
        assert abs(phi_kernel(2, J1_ZERO_1).value) <= 1e-8

    @pytest.mark.parametrize("n", [2, 3])
    def test_quadrature_vs_bessel_sup(self, n):
        taus = np.arange(0.0, 30.0001, 0.05)
        sup = max(abs(_phi_quadrature(n, float(t)) - phi_kernel_bessel(n, float(t))) for t in taus)
        assert sup <= 1e-9

    def test_domain(self):
        with pytest.raises(DomainError):
            phi_kernel(2, -0.1)
        with pytest.raises(DomainError):
            phi_kernel(1, 0.0)


class TestPhiKernelZero:
    def test_known_zeros(self):
        assert phi_kernel_zero(2, 1) == pytest.approx(J1_ZERO_1, abs=1e-9)
        assert phi_kernel_zero(3, 1) == pytest.approx(TAN_ROOT_1, abs=1e-9)
        assert phi_kernel_zero(3, 2) == pytest.approx(TAN_ROOT_2, abs=1e-9)

    def test_phi3_zeros_satisfy_tan_identity(self):
        for i in (1, 2, 3, 4):
            z = phi_kernel_zero(3, i)
            # tan z = z, checked through the scale-free residual sin - z cos
            assert abs(math.sin(z) - z * math.cos(z)) <= 1e-10 * (1.0 + z * z)

    def test_range_error(self):
        with pytest.raises(RangeError):
            phi_kernel_zero(2, 100)

    def test_domain(self):
        with pytest.raises(DomainError):
            phi_kernel_zero(4, 1)
        with pytest.raises(DomainError):
            phi_kernel_zero(2, 0)


class TestEpsilonExponent:
    def test_examples(self):
        assert epsilon_exponent(2, math.inf) == 0.5
        assert epsilon_exponent(2, 6.0) == pytest.approx(1.0 / 6.0, abs=1e-15)
        assert epsilon_exponent(2, 2.0) == 0.0

    @pytest.mark.parametrize("n", [2, 3])
    def test_branches_cross_exactly(self, n):
        p_star = 2.0 * (n + 1) / (n - 1)
        assert (n - 1) / 2.0 - n / p_star == (0.25 - 0.5 / p_star) * (n - 1.0)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_monotone(self, n):
        grid = [2.0, 2.2, 3.0, 4.0, 6.0, 10.0, 40.0, 1e4, math.inf]
        vals = [epsilon_exponent(n, p) for p in grid]
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_domain(self):
        with pytest.raises(DomainError):
            epsilon_exponent(2, 1.5)
