"""Renyi-divergence accounting: curves, composition, zCDP fit, conversion.

The conversion from a Renyi curve to an approximate-DP profile offers two
strategies.  ``tight`` (default) is the order-optimized bound
delta = min_t min( e^{(t-1)(eps(t)-eps)} (1-1/t)^{t-1} / t,  sqrt(1-e^{-eps(t)}) )
whose second member is the total-variation cap; ``classic`` is the plain
e^{(t-1)(eps(t)-eps)} bound.  The classic bound is vacuous (delta = 1) for
eps below sup_t eps(t)-ish, which makes profile-distance comparisons
against exact curves meaningless in the small-eps regime; the tight bound
is what the comparison tables here are calibrated against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from .errors import InvalidParamError
from .pld import PrivacyProfile

CONVERSIONS = ("tight", "classic")


def default_t_grid() -> np.ndarray:
    """Orders for closed-form curves: integers plus a log-spaced sweep of
    fractional orders accumulating near 1."""
    return np.unique(
        np.concatenate((1.0 + np.logspace(-3.0, 6.0, 200), np.arange(2.0, 257.0)))
    )


def integer_t_grid(t_max: int = 1024) -> np.ndarray:
    """Orders for the subsampled Gaussian (integer-only moments)."""
    return np.arange(2.0, float(t_max) + 1.0)


@dataclass(frozen=True)
class RdpCurve:
    """Evaluable Renyi bound t -> eps(t) over a default order grid."""

    evaluate: Callable[[np.ndarray], np.ndarray]
    t_grid: np.ndarray = field(default_factory=default_t_grid)
    name: str = "rdp"

    def values(self) -> np.ndarray:
        vals = np.asarray(self.evaluate(self.t_grid), dtype=float)
        if np.any(vals < -1e-12):
            raise InvalidParamError("Renyi bound must be nonnegative")
        return np.maximum(vals, 0.0)

    def __repr__(self):
        return f"RdpCurve({self.name})"


def gaussian_rdp(sigma: float) -> RdpCurve:
    """eps(t) = t / (2 sigma^2) for the unit-sensitivity Gaussian."""
    if sigma <= 0:
        raise InvalidParamError(f"sigma must be positive, got {sigma}")
    c = 1.0 / (2.0 * sigma * sigma)
    return RdpCurve(lambda t: np.asarray(t, dtype=float) * c, name=f"gaussian({sigma:g})")


def subsampled_gaussian_rdp(sigma: float, q: float, t: int) -> float:
    """Exact integer-order Renyi divergence of the Poisson-subsampled
    Gaussian, via the stable log-space binomial expansion."""
    if sigma <= 0:
        raise InvalidParamError(f"sigma must be positive, got {sigma}")
    if not (0.0 < q <= 1.0):
        raise InvalidParamError(f"sampling rate must be in (0, 1], got {q}")
    if not float(t).is_integer() or t < 2:
        raise InvalidParamError(f"order must be an integer >= 2, got {t}")
    t = int(t)
    if q == 1.0:
        return t / (2.0 * sigma * sigma)
    k = np.arange(t + 1)
    log_terms = (
        special.gammaln(t + 1)
        - special.gammaln(k + 1)
        - special.gammaln(t - k + 1)
        + (t - k) * math.log1p(-q)
        + k * math.log(q)
        + k * (k - 1) / (2.0 * sigma * sigma)
    )
    return float(special.logsumexp(log_terms) / (t - 1))


def subsampled_gaussian_rdp_curve(
    sigma: float, q: float, t_grid: np.ndarray | None = None
) -> RdpCurve:
    grid = integer_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    cache: dict[int, float] = {}

    def evaluate(t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t_arr)
        for i, tv in enumerate(t_arr):
            ti = int(round(tv))
            if ti not in cache:
                cache[ti] = subsampled_gaussian_rdp(sigma, q, ti)
            out[i] = cache[ti]
        return out if np.ndim(t) else float(out[0])

    return RdpCurve(evaluate, t_grid=grid, name=f"subsampled({sigma:g},{q:g})")


def laplace_rdp(b: float, t) -> float | np.ndarray:
    """Renyi divergence of Lap(0, b) vs Lap(1, b) at order t > 1 (log-space,
    safe for very large orders)."""
    if b <= 0:
        raise InvalidParamError(f"scale b must be positive, got {b}")
    scalar = np.isscalar(t)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr <= 1.0):
        raise InvalidParamError("orders must be > 1")
    a1 = np.log(t_arr / (2.0 * t_arr - 1.0)) + (t_arr - 1.0) / b
    a2 = np.log((t_arr - 1.0) / (2.0 * t_arr - 1.0)) - t_arr / b
    out = np.logaddexp(a1, a2) / (t_arr - 1.0)
    return float(out[0]) if scalar else out


def laplace_rdp_curve(b: float) -> RdpCurve:
    return RdpCurve(lambda t: laplace_rdp(b, t), name=f"laplace({b:g})")


def compose_rdp(curves: list[tuple[RdpCurve, int]]) -> RdpCurve:
    """Additive composition on a shared order grid."""
    if not curves:
        raise InvalidParamError("need at least one curve")
    grid = curves[0][0].t_grid
    for c, n in curves:
        if n < 1:
            raise InvalidParamError(f"count must be >= 1, got {n}")
        if len(c.t_grid) != len(grid) or np.any(np.abs(c.t_grid - grid) > 1e-9):
            raise InvalidParamError("curves must share one order grid")

    def evaluate(t):
        total = None
        for c, n in curves:
            v = np.asarray(c.evaluate(t), dtype=float) * n
            total = v if total is None else total + v
        return total

    return RdpCurve(evaluate, t_grid=grid, name="composed")


def _log_delta_tight(t: np.ndarray, r: np.ndarray, eps: float) -> float:
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        order_term = (t - 1.0) * (r - eps) + (t - 1.0) * np.log1p(-1.0 / t) - np.log(t)
        tv_cap = 0.5 * np.log1p(-np.exp(-np.maximum(r, 1e-300)))
        log_d = np.minimum(order_term, tv_cap)
    return float(min(np.min(log_d), 0.0))


def _log_delta_classic(t: np.ndarray, r: np.ndarray, eps: float) -> float:
    return float(min(np.min((t - 1.0) * (r - eps)), 0.0))


def rdp_to_profile(curve: RdpCurve, conversion: str = "tight") -> PrivacyProfile:
    """Approximate-DP profile implied by the whole Renyi curve.

    Negative eps are served through the symmetric-guarantee identity
    delta(-e) = 1 - e^{-e} (1 - delta(e)), since a Renyi guarantee holds in
    both adjacency directions.
    """
    if conversion not in CONVERSIONS:
        raise InvalidParamError(f"unknown conversion {conversion!r}")
    t = np.asarray(curve.t_grid, dtype=float)
    r = curve.values()
    log_delta = _log_delta_tight if conversion == "tight" else _log_delta_classic

    def evaluate(eps):
        eps_arr = np.atleast_1d(np.asarray(eps, dtype=float))
        out = np.empty_like(eps_arr)
        for i, e in enumerate(eps_arr):
            if e >= 0:
                out[i] = math.exp(log_delta(t, r, float(e)))
            else:
                d_pos = math.exp(log_delta(t, r, float(-e)))
                out[i] = 1.0 - math.exp(e) * (1.0 - d_pos)
        return np.clip(out, 0.0, 1.0)

    return PrivacyProfile(evaluate, name=f"rdp->adp({curve.name},{conversion})")


def fit_zcdp(curve: RdpCurve) -> float:
    """rho* = max_t eps(t)/t over the curve's grid (a grid lower bound of
    the exact infimum over all orders)."""
    r = curve.values()
    t = np.asarray(curve.t_grid, dtype=float)
    return max(0.0, float(np.max(r / t)))


def zcdp_curve(rho: float, t_grid: np.ndarray | None = None) -> RdpCurve:
    """The Renyi curve eps(t) = rho * t of a zCDP guarantee, on a grid dense
    near t = 1 where the conversion's optimum often sits."""
    if rho < 0:
        raise InvalidParamError(f"rho must be nonnegative, got {rho}")
    if t_grid is None:
        t_grid = np.unique(
            np.concatenate((1.0 + np.logspace(-4.0, 4.0, 600), np.arange(2.0, 257.0)))
        )
    return RdpCurve(
        lambda t: rho * np.asarray(t, dtype=float), t_grid=t_grid, name=f"zcdp({rho:g})"
    )
