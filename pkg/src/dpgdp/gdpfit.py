"""Tight pessimistic Gaussian-DP bounds for trade-off curves.

The fit solves  mu* = max_i { Phi^-1(1 - alpha_i) - Phi^-1(beta_i) }  over
the curve's breakpoints (the infimum over all alpha reduces to the
breakpoints because both curves are convex).  Breakpoints closer than
``boundary_tol`` to the boundary of the unit square are treated as
boundary points and excluded: in that corner regime the discrete curve is
dominated by grid-window artifacts and by loss-support edges where no
Gaussian comparison is meaningful, and including them makes the fitted
value an artifact of the accounting window rather than of the mechanism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from .errors import InvalidParamError, NoFiniteMuError, NonBracketedError
from .mechanisms import gaussian_hockey_stick
from .pld import TradeoffCurve

# f(0) below 1 - GDP_TAIL_TOL means genuine failure mass: no finite mu
GDP_TAIL_TOL = 1e-10
# breakpoints within this distance of the unit-square boundary are ignored
BOUNDARY_TOL = 3e-5
# calibration search cap
MU_MAX = 100.0


@dataclass(frozen=True)
class GdpBound:
    """A fitted mu with optional goodness-of-fit regret."""

    mu: float
    regret: Optional[float] = None
    residual_delta_inf: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.mu) or self.mu < 0:
            raise InvalidParamError(f"mu must be finite and >= 0, got {self.mu}")
        if self.regret is not None and not (0.0 <= self.regret <= 1.0):
            raise InvalidParamError(f"regret out of range: {self.regret}")


def gdp_tradeoff(mu: float, alpha) -> float | np.ndarray:
    """f_mu(alpha) = Phi(Phi^-1(1 - alpha) - mu); f_0 is the diagonal."""
    if mu < 0:
        raise InvalidParamError(f"mu must be nonnegative, got {mu}")
    scalar = np.isscalar(alpha)
    a = np.clip(np.atleast_1d(np.asarray(alpha, dtype=float)), 0.0, 1.0)
    if mu == 0.0:
        out = 1.0 - a
    else:
        with np.errstate(divide="ignore"):
            z = -special.ndtri(np.clip(a, 1e-320, 1.0))  # Phi^-1(1 - alpha)
        out = np.where(a == 0.0, 1.0, special.ndtr(z - mu))
        out = np.where(a == 1.0, 0.0, out)
    return float(out[0]) if scalar else out


def gdp_curve(mu: float, n: int = 40001, z_max: float = 12.0) -> TradeoffCurve:
    """Piecewise-linear rendering of f_mu, dense enough that the chord error
    (~0.4 mu dz^2 / 8) stays below regret resolution."""
    z = np.linspace(-z_max, z_max, n)
    alpha = special.ndtr(-z)
    beta = special.ndtr(z - mu)
    alpha = np.concatenate(([1.0], alpha, [0.0]))
    beta = np.concatenate(([0.0], beta, [1.0]))
    alpha_bar = np.concatenate(([0.0], special.ndtr(z), [1.0]))
    beta_bar = np.concatenate(([1.0], special.ndtr(mu - z), [0.0]))
    return TradeoffCurve(alpha, beta, alpha_bar, beta_bar)


def _inv_phi(p: np.ndarray, p_bar: np.ndarray) -> np.ndarray:
    """Phi^-1(p) using whichever of p, 1-p carries more precision."""
    return np.where(p <= 0.5, special.ndtri(np.maximum(p, 1e-320)),
                    -special.ndtri(np.maximum(p_bar, 1e-320)))


def fit_mu(
    curve: TradeoffCurve,
    boundary_tol: float = BOUNDARY_TOL,
    gdp_tail_tol: float = GDP_TAIL_TOL,
) -> GdpBound:
    """Smallest mu with f_mu below the curve at every interior breakpoint."""
    residual = curve.corner_residual()
    if curve.f_zero() < 1.0 - gdp_tail_tol:
        raise NoFiniteMuError(residual)
    a, b = curve.alpha, curve.beta
    ab, bb = curve.alpha_bar, curve.beta_bar
    interior = (
        (a >= boundary_tol)
        & (ab >= boundary_tol)
        & (b >= boundary_tol)
        & (bb >= boundary_tol)
    )
    if not np.any(interior):
        return GdpBound(mu=0.0, residual_delta_inf=residual)
    z_alpha = _inv_phi(ab[interior], a[interior])   # Phi^-1(1 - alpha)
    z_beta = _inv_phi(b[interior], bb[interior])    # Phi^-1(beta)
    mu = max(0.0, float(np.max(z_alpha - z_beta)))
    _assert_dominates(mu, curve, interior)
    return GdpBound(mu=mu, residual_delta_inf=residual)


def _assert_dominates(mu: float, curve: TradeoffCurve, mask: np.ndarray) -> None:
    f_mu = gdp_tradeoff(mu, curve.alpha[mask])
    worst = float(np.max(f_mu - curve.beta[mask]))
    if worst > 1e-12:
        raise AssertionError(
            f"fitted mu={mu} fails dominance by {worst:.3e} at a breakpoint"
        )


def advantage(curve: TradeoffCurve) -> float:
    """max_alpha (1 - alpha - f(alpha)); attained at a breakpoint."""
    return max(0.0, float(np.max(curve.alpha_bar - curve.beta)))


def calibrate_mu_to_adp(eps: float, delta: float, tol: float = 1e-12) -> float:
    """The unique mu whose Gaussian profile passes through (eps, delta)."""
    if not (0.0 < delta < 1.0):
        raise InvalidParamError(f"delta must be in (0, 1), got {delta}")
    hi_val = float(gaussian_hockey_stick(MU_MAX, eps))
    if delta >= hi_val:
        raise NonBracketedError(
            f"delta={delta:g} not bracketed below mu={MU_MAX:g} at eps={eps:g}"
        )
    lo, hi = 0.0, MU_MAX
    # delta is strictly increasing in mu at fixed eps
    while hi - lo > 1e-15 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        val = float(gaussian_hockey_stick(mid, eps)) if mid > 0 else 0.0
        if val < delta:
            lo = mid
        else:
            hi = mid
        if val != 0.0 and abs(val - delta) <= tol * delta:
            return mid
    return 0.5 * (lo + hi)


def mu_to_epsilon(mu: float, delta: float, tol: float = 1e-12) -> float:
    """The eps at which gaussian_profile(mu) equals delta; inverse of
    :func:`calibrate_mu_to_adp` in its bracketed range."""
    if mu <= 0:
        raise InvalidParamError(f"mu must be positive, got {mu}")
    if not (0.0 < delta < 1.0):
        raise InvalidParamError(f"delta must be in (0, 1), got {delta}")
    tv = float(gaussian_hockey_stick(mu, 0.0))
    if delta >= tv:
        # profile at eps <= 0 still decreases from 1; bracket leftwards
        lo = -1.0
        while float(gaussian_hockey_stick(mu, lo)) < delta:
            lo *= 2.0
            if lo < -1e6:
                raise NonBracketedError(f"delta={delta:g} not reachable")
        hi = 0.0
    else:
        lo, hi = 0.0, 1.0
        while float(gaussian_hockey_stick(mu, hi)) > delta:
            lo, hi = hi, hi * 2.0
            if hi > 1e6:
                raise NonBracketedError(f"delta={delta:g} not reachable")
    while hi - lo > tol * max(1.0, abs(hi), abs(lo)):
        mid = 0.5 * (lo + hi)
        if float(gaussian_hockey_stick(mu, mid)) > delta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
