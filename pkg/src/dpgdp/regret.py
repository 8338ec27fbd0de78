"""Representation regret: the down-left shift divergence between curves.

``regret_tradeoff(f, g)`` is the smallest kappa with
f(alpha + kappa) - kappa <= g(alpha) for all alpha, found by bisection.
Feasibility of a given kappa is decided exactly on the union of both
curves' breakpoints (shifted appropriately): the margin is a difference of
piecewise-linear functions, so its maximum sits on a breakpoint of either.
The returned value is the lower end of the final bracket, so reported
regrets never overstate the truth by more than ``tol``.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParamError
from .pld import PrivacyProfile, TradeoffCurve

DEFAULT_TOL = 1e-6


def _interp(curve: TradeoffCurve, alpha: np.ndarray) -> np.ndarray:
    return np.interp(np.clip(alpha, 0.0, 1.0), curve.alpha[::-1], curve.beta[::-1])


def _feasible(f: TradeoffCurve, g: TradeoffCurve, kappa: float) -> bool:
    checks = np.concatenate((f.alpha - kappa, g.alpha, (0.0, 1.0)))
    checks = np.clip(checks, 0.0, 1.0)
    lhs = _interp(f, checks + kappa) - kappa
    rhs = _interp(g, checks)
    return bool(np.all(lhs <= rhs + 1e-15))


def regret_tradeoff(
    f: TradeoffCurve, f_tilde: TradeoffCurve, tol: float = DEFAULT_TOL
) -> float:
    """Delta-divergence from ``f`` to ``f_tilde`` (lower bracket)."""
    if tol <= 0:
        raise InvalidParamError(f"tol must be positive, got {tol}")
    if _feasible(f, f_tilde, 0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _feasible(f, f_tilde, mid):
            hi = mid
        else:
            lo = mid
    return lo


def regret_symmetrized(
    f: TradeoffCurve, f_tilde: TradeoffCurve, tol: float = DEFAULT_TOL
) -> float:
    """Symmetrized divergence: max of the two one-sided values."""
    return max(regret_tradeoff(f, f_tilde, tol), regret_tradeoff(f_tilde, f, tol))


def regret_profile(
    d: PrivacyProfile | np.ndarray,
    d_tilde: PrivacyProfile | np.ndarray,
    eps_grid: np.ndarray,
) -> float:
    """Profile form of the divergence on a grid:
    max_eps [delta_tilde(eps) - delta(eps)]^+ / (1 + e^eps).

    The per-eps solution is closed-form, so no bisection is needed; the
    grid maximum is a lower bound of the true supremum that tightens as the
    grid refines.
    """
    eps_grid = np.asarray(eps_grid, dtype=float)
    if eps_grid.ndim != 1 or eps_grid.size == 0:
        raise InvalidParamError("eps_grid must be a nonempty 1-D array")
    if np.any(np.diff(eps_grid) < 0):
        raise InvalidParamError("eps_grid must be sorted")
    dv = d.evaluate(eps_grid) if isinstance(d, PrivacyProfile) else np.asarray(d)
    tv = (
        d_tilde.evaluate(eps_grid)
        if isinstance(d_tilde, PrivacyProfile)
        else np.asarray(d_tilde)
    )
    if dv.shape != eps_grid.shape or tv.shape != eps_grid.shape:
        raise InvalidParamError("profile arrays must match eps_grid shape")
    gap = tv - dv
    scale = 1.0 + np.exp(np.minimum(eps_grid, 700.0))
    return max(0.0, float(np.max(gap / scale)))
