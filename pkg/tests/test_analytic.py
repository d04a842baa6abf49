"""Closed-form derivatives of power functions and the problem catalog."""

import math

import numpy as np
import pytest
from scipy.special import gamma as spgamma

from fracbvp.analytic import (
    PowerSum,
    PowerTerm,
    elliptic_rhs,
    expand_polynomial,
    left_derivative,
    left_rl_derivative_power,
    right_derivative,
    right_rl_derivative_power,
    riesz_symmetric_constant,
)
from fracbvp.catalog import CATALOG_NAMES, catalog, singular_term, with_overrides
from fracbvp.grids import Grid, GridFunction
from fracbvp.operators import apply_left_wsgd
from fracbvp.solver import FracParams

XS = np.linspace(0.05, 0.95, 11)


class TestPowerDerivatives:
    @pytest.mark.parametrize("beta", (1.2, 1.5, 1.9))
    def test_left_pole_annihilates(self, beta):
        d = left_rl_derivative_power(beta, beta - 1.0)
        assert d.terms == ()
        np.testing.assert_array_equal(d(XS), np.zeros_like(XS))

    @pytest.mark.parametrize("beta", (1.2, 1.5, 1.9))
    def test_left_of_x_beta_is_gamma_constant(self, beta):
        d = left_rl_derivative_power(beta, beta)
        np.testing.assert_allclose(d(XS), spgamma(beta + 1.0), rtol=1e-14)

    def test_left_cubic_against_gamma_oracle(self):
        d = left_rl_derivative_power(1.5, 3.0)
        oracle = spgamma(4.0) / spgamma(2.5) * XS ** 1.5
        np.testing.assert_allclose(d(XS), oracle, rtol=1e-14)

    @pytest.mark.parametrize("beta", (1.2, 1.5, 1.9))
    def test_right_mirrors(self, beta):
        assert right_rl_derivative_power(beta, beta - 1.0).terms == ()
        np.testing.assert_allclose(
            right_rl_derivative_power(beta, beta)(XS), spgamma(beta + 1.0),
            rtol=1e-14)
        d = right_rl_derivative_power(1.5, 2.0)
        oracle = spgamma(3.0) / spgamma(1.5) * (1.0 - XS) ** 0.5
        np.testing.assert_allclose(d(XS), oracle, rtol=1e-14)

    def test_rejects_exponent_at_or_below_minus_one(self):
        with pytest.raises(ValueError):
            left_rl_derivative_power(1.5, -1.0)

    @pytest.mark.parametrize("k", (2, 3, 4))
    def test_beta_two_reduces_to_second_derivative(self, k):
        # Gamma(k+1)/Gamma(k-1) must be the exact integer k(k-1)
        d = left_rl_derivative_power(2.0, float(k))
        assert len(d.terms) == 1
        assert d.terms[0].coef == float(k * (k - 1))
        assert d.terms[0].left == float(k - 2)

    def test_linearity_on_random_sums(self):
        rng = np.random.default_rng(7)
        beta = 1.6
        for _ in range(5):
            coefs = rng.uniform(-2, 2, size=5)
            exps = rng.uniform(0.0, 4.0, size=5)
            whole = left_derivative(
                PowerSum.left_anchored(zip(coefs, exps)), beta)
            parts = np.zeros_like(XS)
            for c, e in zip(coefs, exps):
                parts = parts + c * left_rl_derivative_power(beta, e)(XS)
            np.testing.assert_allclose(whole(XS), parts, rtol=1e-12, atol=1e-12)


class TestExpandPolynomial:
    def test_x_squared_right_anchored(self):
        ps = expand_polynomial([0.0, 0.0, 1.0], "right")
        got = {t.right: t.coef for t in ps.terms}
        assert got == {0.0: 1.0, 1.0: -2.0, 2.0: 1.0}

    def test_constant(self):
        ps = expand_polynomial([3.5], "left")
        assert ps.terms == (PowerTerm(3.5, 0.0, 0.0),)

    def test_round_trip_evaluation(self):
        # x^2 (1-x)^2 = x^2 - 2x^3 + x^4
        coeffs = [0.0, 0.0, 1.0, -2.0, 1.0]
        left = expand_polynomial(coeffs, "left")
        right = expand_polynomial(coeffs, "right")
        direct = XS ** 2 * (1 - XS) ** 2
        np.testing.assert_allclose(left(XS), direct, atol=1e-13)
        np.testing.assert_allclose(right(XS), direct, atol=1e-13)
        np.testing.assert_allclose(left(XS), right(XS), atol=1e-13)

    def test_bad_orientation(self):
        with pytest.raises(ValueError):
            expand_polynomial([1.0], "up")


class TestPowerSumAlgebra:
    def test_add_scale_negate(self):
        p = PowerSum.left_anchored([(2.0, 1.0)])
        q = PowerSum.right_anchored([(1.0, 2.0)])
        np.testing.assert_allclose((p + q)(XS), 2 * XS + (1 - XS) ** 2, rtol=1e-15)
        np.testing.assert_allclose((3.0 * p)(XS), 6 * XS, rtol=1e-15)
        np.testing.assert_allclose((p - p)(XS), 0.0, atol=0)

    def test_mismatched_intervals_rejected(self):
        p = PowerSum.left_anchored([(1.0, 1.0)], a=0.0, b=1.0)
        q = PowerSum.left_anchored([(1.0, 1.0)], a=0.0, b=2.0)
        with pytest.raises(ValueError):
            p + q

    def test_orientation_flag(self):
        assert PowerSum.left_anchored([(1.0, 1.5)]).orientation == "left"
        assert PowerSum.right_anchored([(1.0, 1.5)]).orientation == "right"
        assert PowerSum.constant(2.0).orientation == "constant"
        mixed = PowerSum(0.0, 1.0, (PowerTerm(1.0, 0.7, 0.7),))
        assert mixed.orientation == "mixed"

    def test_mixed_orientation_cannot_take_fractional_side(self):
        mixed = PowerSum(0.0, 1.0, (PowerTerm(1.0, 0.7, 0.7),))
        with pytest.raises(ValueError):
            left_derivative(mixed, 1.5)


class TestEllipticRhs:
    def test_one_sided_singular_rhs_formula(self):
        # image of x^{b-1}(1-x) under u - D_left^b u is x^{b-1}(1-x) + Gamma(b+1)
        for beta in (1.1, 1.5, 1.9):
            spec = singular_term(FracParams(1.0, beta, 1.0))
            expect = spec.us(XS) + spgamma(beta + 1.0)
            np.testing.assert_allclose(spec.fs(XS), expect, rtol=1e-13)

    def test_symmetric_singular_rhs_formula(self):
        # image of x^{b/2}(1-x)^{b/2}: us - cos(b pi/2) Gamma(b+1)
        for beta in (1.1, 1.5, 1.9):
            spec = singular_term(FracParams(1.0, beta, 0.5))
            shift = -math.cos(0.5 * beta * math.pi) * spgamma(beta + 1.0)
            np.testing.assert_allclose(spec.fs(XS) - spec.us(XS), shift, rtol=1e-12)

    def test_riesz_identity_pointwise(self):
        beta = 1.7
        spec = singular_term(FracParams(1.0, beta, 0.5))
        xs = np.linspace(0.001, 0.999, 100)
        diff = spec.fs(xs) - spec.us(xs)
        target = -math.cos(0.5 * beta * math.pi) * spgamma(beta + 1.0)
        np.testing.assert_allclose(diff, target, rtol=1e-12)
        assert abs(riesz_symmetric_constant(beta) + spgamma(beta + 1.0)) < 1e-14

    def test_no_closed_form_for_intermediate_theta(self):
        u = PowerSum.left_anchored([(1.0, 0.7)])
        with pytest.raises(ValueError):
            elliptic_rhs(u, 1.0, 1.5, 0.3)

    def test_theta_zero_mirror(self):
        beta = 1.4
        spec = singular_term(FracParams(1.0, beta, 0.0))
        expect = spec.us(XS) + spgamma(beta + 1.0)
        np.testing.assert_allclose(spec.fs(XS), expect, rtol=1e-13)


class TestCatalog:
    def test_names_and_unknown(self):
        for name in CATALOG_NAMES:
            catalog(name, 1.5)
        with pytest.raises(KeyError):
            catalog("nope", 1.5)
        with pytest.raises(ValueError):
            catalog("ex1-case1", 2.5)

    def test_ex1_case2_rhs_is_x_plus_one(self):
        spec = catalog("ex1-case2", 1.3)
        np.testing.assert_allclose(spec.rhs(XS), XS + 1.0, rtol=1e-15)
        assert spec.exact is None

    def test_ex2_case1_exact_values(self):
        beta = 1.5
        spec = catalog("ex2-case1", beta)
        expect = XS ** 2 * (1 - XS) ** 2 + 2 * XS ** (beta / 2) * (1 - XS) ** (beta / 2)
        np.testing.assert_allclose(spec.exact(XS), expect, rtol=1e-14)
        assert spec.params.theta == 0.5

    def test_exact_solutions_vanish_at_endpoints(self):
        ends = np.array([0.0, 1.0])
        for name in ("ex1-case1", "ex2-case1"):
            spec = catalog(name, 1.5)
            np.testing.assert_allclose(spec.exact(ends), 0.0, atol=1e-15)
            np.testing.assert_allclose(spec.singular.us(ends), 0.0, atol=1e-15)

    @pytest.mark.parametrize("beta", (1.5,))
    def test_ex1_case1_rhs_cross_checked_by_discrete_operator(self, beta):
        # alpha*u - (discrete left derivative of u-samples) must approach the
        # closed-form rhs; away from the boundary the defect is O(h^(b-1))
        spec = catalog("ex1-case1", beta)
        grid = Grid(0.0, 1.0, 2 ** 14)
        v = GridFunction.sample(grid, spec.exact)
        dv = apply_left_wsgd(v, beta)
        lhs = spec.params.alpha * v.interior - dv.interior
        rhs = spec.rhs(grid.interior_nodes())
        mid = slice(2 ** 12, 3 * 2 ** 12)  # central half of the interval
        h = grid.h
        tol = 5.0 * h ** (beta - 1.0)
        assert np.max(np.abs(lhs[mid] - rhs[mid])) < tol

    def test_ex3_consistency(self):
        beta = 1.6
        prob = catalog("ex3", beta)
        assert prob.final_time == 1.0
        np.testing.assert_allclose(prob.initial(XS), 0.0, atol=0)
        np.testing.assert_allclose(
            prob.exact(XS, 1.0),
            (XS ** (beta - 1) + XS ** 2 + XS ** (1 + beta)) * (1 - XS),
            rtol=1e-14)
        # rhs at t: 3t^2*S - t^3*DS; at t=0 it vanishes
        np.testing.assert_allclose(prob.rhs(XS, 0.0), 0.0, atol=0)

    def test_overrides(self):
        spec = catalog("ex1-case2", 1.5)
        # reaction override keeps the fixed rhs, rebuilds the singular image
        mod = with_overrides(spec, alpha=2.0)
        assert mod.params.alpha == 2.0
        np.testing.assert_allclose(mod.rhs(XS), XS + 1.0)
        np.testing.assert_allclose(
            mod.singular.fs(XS), 2.0 * mod.singular.us(XS) + spgamma(2.5),
            rtol=1e-13)
        # theta without a closed-form singular term drops the correction
        free = with_overrides(spec, theta=0.3)
        assert free.singular is None
        # exponent override
        rho = with_overrides(spec, rho=1.5 - 0.9)
        assert rho.singular.rho_left == pytest.approx(0.6)

    def test_override_with_exact_rebuilds_rhs(self):
        spec = catalog("ex1-case1", 1.5)
        mod = with_overrides(spec, alpha=3.0)
        expect = 3.0 * spec.exact(XS) + (spec.rhs(XS) - spec.exact(XS))
        np.testing.assert_allclose(mod.rhs(XS), expect, rtol=1e-12)

    def test_symmetric_rho_override_rejected(self):
        spec = catalog("ex2-case2", 1.5)
        with pytest.raises(ValueError):
            singular_term(spec.params, rho=0.9)
