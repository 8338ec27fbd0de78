"""Composition: convolution identities, brute-force oracles, tail safety."""

import itertools
import math

import numpy as np
import pytest

from dpgdp import (
    DiscretePLD,
    GridMismatchError,
    GridOverflowError,
    LossGrid,
    choose_grid,
    compose,
    delta_at,
    discretize_ctd,
    gaussian_profile,
    randomized_response_pld,
    self_compose,
)


def brute_force_rr_delta(eps0: float, t: int, eps: float) -> float:
    """Exact delta(eps) of t-fold randomized response by enumerating all
    2^t outcome sequences."""
    p_hi = math.exp(eps0) / (1 + math.exp(eps0))
    total = 0.0
    for flips in itertools.product((0, 1), repeat=t):
        loss = sum(eps0 if f else -eps0 for f in flips)
        prob = math.prod(p_hi if f else 1 - p_hi for f in flips)
        total += prob * max(0.0, 1.0 - math.exp(eps - loss))
    return total


def test_identity_element():
    profile = gaussian_profile(1.0)
    pld = discretize_ctd(profile, LossGrid(-5.0, 1e-3, 10001))
    unit = DiscretePLD(LossGrid(0.0, 1e-3, 1), np.array([1.0]), 0.0)
    out = compose(pld, unit)
    assert out.grid.start == pytest.approx(pld.grid.start, abs=1e-12)
    np.testing.assert_allclose(out.pmf_y, pld.pmf_y, atol=1e-15)
    assert out.delta_inf == pytest.approx(pld.delta_inf, abs=1e-15)


@pytest.mark.parametrize("t", [1, 2, 3, 5])
def test_rr_self_composition_matches_enumeration(t):
    eps0 = 1.0
    pld = self_compose(randomized_response_pld(eps0, 1e-3), t)
    for eps in np.linspace(-t * eps0 - 0.5, t * eps0 + 0.5, 50):
        oracle = brute_force_rr_delta(eps0, t, eps)
        got = delta_at(pld, eps)
        assert got >= oracle - 1e-12  # pessimism everywhere
    # equality at (on-grid) composed atom positions
    for k in range(t + 1):
        eps = -t * eps0 + 2 * k * eps0
        assert delta_at(pld, eps) == pytest.approx(
            brute_force_rr_delta(eps0, t, eps), abs=1e-10
        )


def test_gaussian_composition_identity():
    # mu 0.6 (+) mu 0.8 compose to exactly mu 1.0
    step = 2e-4
    plds = []
    for mu in (0.6, 0.8):
        profile = gaussian_profile(mu)
        plds.append(discretize_ctd(profile, choose_grid(profile, step)))
    composed = compose(plds[0], plds[1])
    target = gaussian_profile(1.0)
    eps = composed.grid.points[:: composed.grid.count // 16][1:15]
    np.testing.assert_allclose(
        delta_at(composed, eps), target.evaluate(eps), atol=1e-8
    )


def test_t_equal_one_returns_input():
    pld = randomized_response_pld(0.5, 1e-3)
    assert self_compose(pld, 1) is pld


def test_fft_and_squaring_agree_entrywise():
    pld = randomized_response_pld(0.5, 1e-3)
    a = self_compose(pld, 8, strategy="fft")
    b = self_compose(pld, 8, strategy="square")
    lo = max(a.grid.start, b.grid.start)
    hi = min(a.grid.last, b.grid.last)
    sa = slice(
        round((lo - a.grid.start) / a.grid.step),
        round((hi - a.grid.start) / a.grid.step) + 1,
    )
    sb = slice(
        round((lo - b.grid.start) / b.grid.step),
        round((hi - b.grid.start) / b.grid.step) + 1,
    )
    np.testing.assert_allclose(a.pmf_y[sa], b.pmf_y[sb], atol=1e-12)


def test_fft_and_squaring_agree_for_subsampled():
    profile = gaussian_profile(0.4)
    pld = discretize_ctd(profile, choose_grid(profile, 1e-3, compositions=8))
    a = self_compose(pld, 8, strategy="fft")
    b = self_compose(pld, 8, strategy="square")
    lo = max(a.grid.start, b.grid.start)
    hi = min(a.grid.last, b.grid.last)
    sa = slice(
        round((lo - a.grid.start) / a.grid.step),
        round((hi - a.grid.start) / a.grid.step) + 1,
    )
    sb = slice(
        round((lo - b.grid.start) / b.grid.step),
        round((hi - b.grid.start) / b.grid.step) + 1,
    )
    np.testing.assert_allclose(a.pmf_y[sa], b.pmf_y[sb], atol=1e-12)


def test_associativity_of_composition():
    pld = randomized_response_pld(0.8, 1e-3)
    via_self = self_compose(pld, 4, strategy="square")
    pair = compose(pld, pld)
    via_pairs = compose(pair, pair)
    lo = max(via_self.grid.start, via_pairs.grid.start)
    hi = min(via_self.grid.last, via_pairs.grid.last)
    for eps in np.linspace(lo, hi, 21):
        assert delta_at(via_self, eps) == pytest.approx(
            delta_at(via_pairs, eps), abs=1e-12
        )


def test_mass_conservation_after_composition(small_corpus_results):
    for name, result in small_corpus_results.items():
        for pld in result.plds:
            total = float(np.sum(pld.pmf_y.astype(np.longdouble))) + pld.delta_inf
            assert abs(total - 1.0) <= 1e-10, name


def test_delta_monotone_in_composition_count():
    profile = gaussian_profile(0.3)
    pld = discretize_ctd(profile, choose_grid(profile, 1e-3, compositions=16))
    eps = np.linspace(-1.0, 2.0, 13)
    prev = np.zeros_like(eps)
    for t in (1, 2, 4, 8, 16):
        cur = np.asarray(delta_at(self_compose(pld, t), eps))
        assert np.all(cur >= prev - 1e-12)
        prev = cur


def test_truncation_is_pessimistic():
    from dpgdp.compose import truncate

    profile = gaussian_profile(1.0)
    pld = discretize_ctd(profile, LossGrid(-6.0, 1e-3, 12001))
    cut = truncate(pld, -2.0, 2.0)
    eps = np.linspace(-2.0, 2.0, 41)
    assert np.all(
        np.asarray(delta_at(cut, eps)) >= np.asarray(delta_at(pld, eps)) - 1e-15
    )


def test_grid_mismatch_rejected():
    a = randomized_response_pld(0.5, 1e-3)
    b = randomized_response_pld(0.5, 2e-3)
    with pytest.raises(GridMismatchError):
        compose(a, b)


def test_overflow_guard():
    profile = gaussian_profile(1.0)
    pld = discretize_ctd(profile, choose_grid(profile, 1e-3))
    with pytest.raises(GridOverflowError):
        self_compose(pld, 4, max_points=1024)
