"""Mechanism profiles against independent quadrature oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special, stats

from dpgdp import (
    InvalidParamError,
    MechanismSpec,
    adp_tradeoff,
    eval_tradeoff,
    gaussian_profile,
    laplace_profile,
    pure_dp_to_gdp,
    randomized_response_pld,
    subsampled_gaussian_profile,
)

Q_CIFAR = 16384 / 50000


def hockey_stick_quad(pdf_p, pdf_q, eps, lo, hi, points=None):
    """Adaptive quadrature of int [q(x) - e^eps p(x)]^+ dx."""
    scale = math.exp(eps)

    def integrand(x):
        return max(0.0, pdf_q(x) - scale * pdf_p(x))

    val, err = integrate.quad(
        integrand, lo, hi, points=points, limit=400, epsabs=1e-13, epsrel=1e-12
    )
    assert err < 1e-11
    return val


class TestGaussianProfile:
    def test_table3_anchor_value(self):
        # mu = 1.67 is the published Gaussian equivalent of (8, 1e-5)
        delta = gaussian_profile(1.67).evaluate(8.0)
        assert delta == pytest.approx(1e-5, rel=0.07)

    def test_perfect_privacy_limit(self):
        prof = gaussian_profile(1e-9)
        assert prof.evaluate(0.0) < 1e-8
        assert prof.evaluate(3.0) == 0.0

    def test_matches_quadrature(self):
        prof = gaussian_profile(1.0)
        oracle = hockey_stick_quad(
            stats.norm(0, 1).pdf, stats.norm(1, 1).pdf, 0.5, -12, 13
        )
        assert prof.evaluate(0.5) == pytest.approx(oracle, abs=1e-10)

    def test_negative_eps_tail(self):
        prof = gaussian_profile(1.0)
        oracle = hockey_stick_quad(
            stats.norm(0, 1).pdf, stats.norm(1, 1).pdf, -2.0, -12, 13
        )
        assert prof.evaluate(-2.0) == pytest.approx(oracle, abs=1e-10)


class TestSubsampledGaussian:
    def _densities(self, sigma, q):
        p = stats.norm(0, sigma).pdf
        comp = stats.norm(1, sigma).pdf

        def pdf_q(x):
            return (1 - q) * p(x) + q * comp(x)

        return p, pdf_q

    def test_q_one_reduces_to_gaussian(self):
        prof_s = subsampled_gaussian_profile(2.0, 1.0, "remove")
        prof_g = gaussian_profile(0.5)
        eps = np.linspace(-3, 5, 20)
        np.testing.assert_allclose(
            prof_s.evaluate(eps), prof_g.evaluate(eps), atol=1e-10
        )

    def test_q_zero_is_perfect_privacy(self):
        prof = subsampled_gaussian_profile(2.0, 0.0)
        assert np.all(prof.evaluate(np.linspace(0, 5, 11)) == 0.0)

    @pytest.mark.parametrize("eps", [1.0, 0.05, 0.01, 0.0, -0.05])
    def test_remove_matches_quadrature(self, eps):
        sigma, q = 9.4, Q_CIFAR
        pdf_p, pdf_q = self._densities(sigma, q)
        oracle = hockey_stick_quad(pdf_p, pdf_q, eps, -40 * sigma, 40 * sigma + 1,
                                   points=[0.0, 1.0])
        got = subsampled_gaussian_profile(sigma, q, "remove").evaluate(eps)
        assert got == pytest.approx(oracle, abs=1e-10)

    @pytest.mark.parametrize("eps", [0.05, 0.0, -0.2])
    def test_add_matches_quadrature(self, eps):
        sigma, q = 2.0, 0.3
        pdf_p, pdf_q = self._densities(sigma, q)
        oracle = hockey_stick_quad(pdf_q, pdf_p, eps, -40 * sigma, 40 * sigma + 1,
                                   points=[0.0, 1.0])
        got = subsampled_gaussian_profile(sigma, q, "add").evaluate(eps)
        assert got == pytest.approx(oracle, abs=1e-10)

    def test_monotone_in_q_and_sigma(self):
        eps = np.linspace(0.0, 2.0, 25)
        lo = subsampled_gaussian_profile(3.0, 0.1).evaluate(eps)
        hi = subsampled_gaussian_profile(3.0, 0.3).evaluate(eps)
        assert np.all(hi >= lo - 1e-15)
        tight = subsampled_gaussian_profile(6.0, 0.3).evaluate(eps)
        assert np.all(tight <= hi + 1e-15)

    def test_both_is_pointwise_max(self):
        eps = np.linspace(-2, 2, 41)
        both = subsampled_gaussian_profile(2.0, 0.3).evaluate(eps)
        rem = subsampled_gaussian_profile(2.0, 0.3, "remove").evaluate(eps)
        add = subsampled_gaussian_profile(2.0, 0.3, "add").evaluate(eps)
        np.testing.assert_allclose(both, np.maximum(rem, add), atol=1e-15)


class TestLaplaceProfile:
    def test_pure_dp_point(self):
        assert laplace_profile(1.0).evaluate(1.0) == 0.0

    @pytest.mark.parametrize(
        "eps,closed",
        [(0.0, 1.0 - math.exp(-0.5)), (0.5, 1.0 - math.exp(-0.25))],
    )
    def test_matches_quadrature_and_closed_form(self, eps, closed):
        oracle = hockey_stick_quad(
            stats.laplace(0, 1).pdf, stats.laplace(1, 1).pdf, eps, -60, 61,
            points=[0.0, 1.0],
        )
        got = laplace_profile(1.0).evaluate(eps)
        assert got == pytest.approx(oracle, abs=1e-10)
        assert got == pytest.approx(closed, abs=1e-12)

    def test_zero_beyond_budget(self):
        prof = laplace_profile(0.5)
        assert np.all(prof.evaluate(np.linspace(2.0, 10.0, 9)) == 0.0)


class TestRandomizedResponse:
    def test_zero_eps_single_atom(self):
        pld = randomized_response_pld(0.0, 1e-3)
        assert pld.grid.count == 1
        assert pld.grid.start == 0.0
        np.testing.assert_allclose(pld.pmf_y, [1.0])

    def test_eps_one_masses(self):
        pld = randomized_response_pld(1.0, 1e-4)
        e = math.e
        assert pld.pmf_y[-1] == pytest.approx(e / (1 + e), rel=1e-15)
        assert pld.pmf_y[0] == pytest.approx(1 / (1 + e), rel=1e-15)
        assert float(pld.pmf_y.sum()) == pytest.approx(1.0, abs=1e-15)
        assert pld.grid.last == pytest.approx(1.0, abs=1e-12)

    def test_tradeoff_passes_through_symmetric_point(self):
        from dpgdp import tradeoff_from_pld

        curve = tradeoff_from_pld(randomized_response_pld(1.0, 1e-4))
        a_sym = 1 / (math.e + 1)
        assert eval_tradeoff(curve, a_sym) == pytest.approx(a_sym, abs=1e-12)

    def test_offgrid_snaps_up(self):
        pld = randomized_response_pld(0.1234567, 1e-3)
        assert pld.grid.last >= 0.1234567 - 1e-12
        assert pld.grid.last - 0.1234567 < 1e-3


class TestAdpTradeoff:
    def test_perfect_privacy(self):
        curve = adp_tradeoff(0.0, 0.0)
        a = np.linspace(0, 1, 11)
        np.testing.assert_allclose(eval_tradeoff(curve, a), 1 - a, atol=1e-15)

    def test_f_at_zero(self):
        assert adp_tradeoff(2.0, 0.3).f_zero() == pytest.approx(0.7, abs=1e-15)

    def test_direct_formula_crosscheck(self):
        eps, delta, alpha = 1.0, 0.1, 0.2
        expected = max(
            0.0, 1 - delta - math.e * alpha, math.exp(-1) * (1 - delta - alpha)
        )
        got = eval_tradeoff(adp_tradeoff(eps, delta), alpha)
        assert got == pytest.approx(expected, abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(
        eps=st.floats(min_value=0.0, max_value=6.0),
        delta=st.floats(min_value=0.0, max_value=0.9),
        alpha=st.floats(min_value=0.0, max_value=1.0),
    )
    def test_matches_branch_formula_everywhere(self, eps, delta, alpha):
        expected = max(
            0.0,
            1 - delta - math.exp(eps) * alpha,
            math.exp(-eps) * (1 - delta - alpha),
        )
        got = eval_tradeoff(adp_tradeoff(eps, delta), alpha)
        assert got == pytest.approx(expected, abs=1e-9)


class TestPureDpToGdp:
    def test_zero(self):
        assert pure_dp_to_gdp(0.0) == pytest.approx(0.0, abs=1e-12)

    def test_eps_one_closed_form(self):
        oracle = float(-2.0 * special.ndtri(1.0 / (math.e + 1.0)))
        assert pure_dp_to_gdp(1.0) == pytest.approx(oracle, abs=1e-12)
        assert pure_dp_to_gdp(1.0) == pytest.approx(1.2316, abs=1e-3)

    def test_monotone(self):
        eps = np.linspace(0, 5, 21)
        mus = np.array([pure_dp_to_gdp(e) for e in eps])
        assert np.all(np.diff(mus) > 0)

    def test_gdp_curve_dominated_by_rr_curve(self):
        from dpgdp import gdp_tradeoff, tradeoff_from_pld

        mu = pure_dp_to_gdp(1.0)
        rr_curve = tradeoff_from_pld(randomized_response_pld(1.0, 1e-4))
        alpha = np.linspace(0, 1, 1000)
        assert np.all(
            gdp_tradeoff(mu, alpha) <= eval_tradeoff(rr_curve, alpha) + 1e-12
        )


def test_profiles_nonincreasing_and_convex_in_exp_eps():
    profiles = [
        gaussian_profile(1.0),
        laplace_profile(1.0),
        subsampled_gaussian_profile(2.0, 0.25),
    ]
    eps = np.linspace(-2.0, 3.0, 200)
    gamma = np.exp(eps)
    for prof in profiles:
        d = prof.evaluate(eps)
        assert np.all(np.diff(d) <= 1e-12)
        slopes = np.diff(d) / np.diff(gamma)
        assert np.all(np.diff(slopes) >= -1e-10)


def test_mechanism_spec_validation():
    with pytest.raises(InvalidParamError):
        MechanismSpec(kind="nope")
    with pytest.raises(InvalidParamError):
        MechanismSpec(kind="gaussian")
    with pytest.raises(InvalidParamError):
        MechanismSpec(kind="subsampled_gaussian", sigma=1.0, q=1.5)
    with pytest.raises(InvalidParamError):
        MechanismSpec(kind="laplace", b=-1.0)
    spec = MechanismSpec(kind="subsampled_gaussian", sigma=2.0, q=0.5)
    assert MechanismSpec.from_dict(spec.to_dict()) == spec
