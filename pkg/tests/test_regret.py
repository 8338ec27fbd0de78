"""The shift divergence between curves and between profiles."""

import math

import numpy as np
import pytest

from dpgdp import (
    PrivacyProfile,
    adp_tradeoff,
    advantage,
    fit_mu,
    gaussian_profile,
    gdp_curve,
    randomized_response_pld,
    regret_profile,
    regret_symmetrized,
    regret_tradeoff,
    tradeoff_from_pld,
)
from dpgdp.regret import _feasible


@pytest.fixture(scope="module")
def rr_curve():
    return tradeoff_from_pld(randomized_response_pld(1.0, 1e-4))


def test_self_regret_is_zero(rr_curve):
    assert regret_tradeoff(rr_curve, rr_curve) == 0.0
    assert regret_symmetrized(rr_curve, rr_curve) == 0.0


def test_rr_vs_fitted_gdp(rr_curve):
    mu = fit_mu(rr_curve).mu
    value = regret_tradeoff(rr_curve, gdp_curve(mu))
    assert value == pytest.approx(0.058, abs=2e-3)


def test_perfect_privacy_distance_is_half_advantage(rr_curve):
    diagonal = adp_tradeoff(0.0, 0.0)
    value = regret_symmetrized(diagonal, rr_curve)
    assert value == pytest.approx(0.5 * advantage(rr_curve), abs=5e-6)


def test_symmetrization_unneeded_for_pessimistic_fits(small_corpus_results):
    for name, result in small_corpus_results.items():
        gdp = gdp_curve(result.bound.mu)
        for curve in result.curves:
            one_sided = regret_tradeoff(curve, gdp)
            both = regret_symmetrized(curve, gdp)
            assert both == pytest.approx(one_sided, abs=1e-5), name
            # the reverse direction vanishes up to the bisection tolerance
            # plus the slack of the boundary-floored fit near the corners
            assert regret_tradeoff(gdp, curve) <= 1e-5, name


def test_triangle_inequality_on_corpus(small_corpus_results):
    curves = [res.curves[0] for res in small_corpus_results.values()]
    curves.append(gdp_curve(0.7))
    curves.append(adp_tradeoff(1.0, 1e-3))
    rng = np.random.default_rng(11)
    tol = 1e-6
    for _ in range(20):
        ia, ib, ic = rng.choice(len(curves), size=3, replace=False)
        d_ac = regret_symmetrized(curves[ia], curves[ic])
        d_ab = regret_symmetrized(curves[ia], curves[ib])
        d_bc = regret_symmetrized(curves[ib], curves[ic])
        assert d_ac <= d_ab + d_bc + 2 * tol


def test_advantage_bound(small_corpus_results):
    tol = 1e-6
    for name, result in small_corpus_results.items():
        gdp = gdp_curve(result.bound.mu)
        for curve in result.curves:
            gap = abs(advantage(curve) - advantage(gdp))
            assert gap <= 2 * regret_symmetrized(curve, gdp) + 4 * tol, name


def test_reported_value_is_lower_bracket(small_corpus_results, rr_curve):
    cases = [res.curves[0] for res in small_corpus_results.values()][:4]
    cases.append(rr_curve)
    tol = 1e-6
    for curve in cases:
        mu = fit_mu(curve).mu
        gdp = gdp_curve(mu)
        kappa = regret_tradeoff(curve, gdp, tol)
        if kappa == 0.0:
            continue
        assert not _feasible(curve, gdp, max(kappa - 2 * tol, 0.0))
        assert _feasible(curve, gdp, kappa + 2 * tol)


class TestProfileForm:
    def test_identical_profiles(self):
        prof = gaussian_profile(1.0)
        grid = np.linspace(-4, 4, 801)
        assert regret_profile(prof, prof, grid) == 0.0

    def test_closed_form_half_at_zero(self):
        zero = PrivacyProfile(lambda e: np.zeros_like(np.asarray(e, float)))
        half = PrivacyProfile(lambda e: np.full_like(np.asarray(e, float), 0.5))
        assert regret_profile(zero, half, np.array([0.0])) == pytest.approx(
            0.25, abs=1e-15
        )

    def test_grid_refinement_never_decreases(self):
        d = gaussian_profile(1.0)
        d_tilde = gaussian_profile(1.4)
        coarse = np.linspace(-4, 4, 41)
        fine = np.linspace(-4, 4, 4001)
        assert regret_profile(d, d_tilde, fine) >= regret_profile(
            d, d_tilde, coarse
        )

    def test_matches_tradeoff_form_for_gaussians(self):
        # the same divergence through both representations
        d = gaussian_profile(1.0)
        d_tilde = gaussian_profile(1.3)
        grid = np.linspace(-12, 12, 20001)
        via_profiles = regret_profile(d, d_tilde, grid)
        via_curves = regret_tradeoff(gdp_curve(1.0), gdp_curve(1.3), tol=1e-8)
        assert via_profiles == pytest.approx(via_curves, abs=1e-5)

    def test_perfect_vs_rr_profile_form(self):
        # same half-advantage identity through profiles
        perfect = PrivacyProfile(
            lambda e: np.maximum(0.0, -np.expm1(np.minimum(e, 0.0)))
        )
        rr_eps = 1.0

        def rr_delta(e):
            e_arr = np.asarray(e, dtype=float)
            hi = math.exp(rr_eps) / (1 + math.exp(rr_eps))
            lo = 1 - hi
            return np.clip(
                hi * -np.expm1(np.minimum(e_arr - rr_eps, 0))
                + lo * -np.expm1(np.minimum(e_arr + rr_eps, 0)),
                0.0,
                1.0,
            )

        rr_prof = PrivacyProfile(rr_delta)
        grid = np.linspace(-6, 6, 12001)
        tv = (math.e - 1) / (math.e + 1)
        got = regret_profile(perfect, rr_prof, grid)
        assert got == pytest.approx(tv / 2, abs=1e-9)
