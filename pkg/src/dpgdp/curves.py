"""Conversions between the exact representations.

DiscretePLD -> profile values (``delta_at``), DiscretePLD -> piecewise
linear trade-off curve (``tradeoff_from_pld``), profile -> trade-off curve
via the hockey-stick envelope (``tradeoff_from_profile``), and evaluation
of piecewise-linear curves.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParamError, NumericalInstabilityError
from .pld import DiscretePLD, PrivacyProfile, TradeoffCurve

# cross-product tolerance below which a middle breakpoint is colinear
PRUNE_TOL = 1e-15


def delta_at(pld: DiscretePLD, eps) -> float | np.ndarray:
    """Hockey-stick divergence sum_i [1 - e^{eps - w_i}]^+ p_i + delta_inf.

    Uses cached long-double suffix sums accumulated from the largest losses
    downward, so tail queries keep full relative precision.
    """
    scalar = np.isscalar(eps)
    eps_arr = np.atleast_1d(np.asarray(eps, dtype=float))
    y_suffix, yx_suffix, _, _ = pld._sums()
    w = pld.grid.points
    j = np.searchsorted(w, eps_arr, side="right")
    out = np.full(eps_arr.shape, pld.delta_inf, dtype=np.longdouble)
    inside = j < len(w)
    jj = j[inside]
    ee = eps_arr[inside].astype(np.longdouble)
    out[inside] += y_suffix[jj] - np.exp(ee) * yx_suffix[jj]
    res = np.clip(out.astype(float), 0.0, 1.0)
    return float(res[0]) if scalar else res


def profile_of_pld(pld: DiscretePLD) -> PrivacyProfile:
    """Wrap a PLD's implied profile as an evaluable object."""
    return PrivacyProfile(
        lambda eps: np.atleast_1d(delta_at(pld, eps)),
        name="pld-profile",
        loss_lower=pld.grid.start,
        loss_upper=pld.grid.last,
    )


def epsilon_for_delta(pld_or_plds, delta: float, tol: float = 1e-12) -> float:
    """Smallest eps with delta_at(eps) <= delta, by bisection.

    Accepts one PLD or a sequence (the pointwise-max profile over adjacency
    directions is then inverted).
    """
    plds = [pld_or_plds] if isinstance(pld_or_plds, DiscretePLD) else list(pld_or_plds)
    if not (0.0 < delta < 1.0):
        raise InvalidParamError(f"delta must be in (0, 1), got {delta}")

    def worst(eps: float) -> float:
        return max(delta_at(p, eps) for p in plds)

    lo = min(p.grid.start for p in plds)
    hi = max(p.grid.last for p in plds)
    if worst(lo) <= delta:
        return lo
    if worst(hi) > delta:
        raise InvalidParamError(
            f"delta={delta:g} is below the residual infinite-loss mass; "
            "widen the accounting grid"
        )
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if worst(mid) > delta:
            lo = mid
        else:
            hi = mid
    return hi


def _prune_colinear(alpha, beta, alpha_bar, beta_bar):
    """Drop duplicate points, then middle breakpoints that do not change
    the slope (relative cross-product test, so tail-scale kinks survive)."""
    if len(alpha) <= 2:
        return alpha, beta, alpha_bar, beta_bar
    dup = np.zeros(len(alpha), dtype=bool)
    dup[1:] = (np.diff(alpha) == 0.0) & (np.diff(beta) == 0.0)
    alpha, beta = alpha[~dup], beta[~dup]
    alpha_bar, beta_bar = alpha_bar[~dup], beta_bar[~dup]
    if len(alpha) <= 2:
        return alpha, beta, alpha_bar, beta_bar
    da = np.diff(alpha)
    db = np.diff(beta)
    cross = da[:-1] * db[1:] - da[1:] * db[:-1]
    scale = np.abs(da[:-1] * db[1:]) + np.abs(da[1:] * db[:-1])
    keep = np.empty(len(alpha), dtype=bool)
    keep[0] = keep[-1] = True
    keep[1:-1] = np.abs(cross) > PRUNE_TOL * np.maximum(scale, 1e-300)
    return alpha[keep], beta[keep], alpha_bar[keep], beta_bar[keep]


def tradeoff_from_pld(pld: DiscretePLD, prune: bool = True) -> TradeoffCurve:
    """Piecewise-linear trade-off curve with breakpoints
    (Pr[X > w_i], Pr[Y <= w_i]), plus the boundary points implied by the
    +inf atom (alpha = 0) and the X residual at -inf (beta = 0)."""
    y_suffix, yx_suffix, y_prefix, x_prefix = pld._sums()
    n = pld.grid.count
    ld = np.longdouble
    # suffix of X strictly above w_i  (exclude index i itself)
    x_total = x_prefix[-1]
    alpha = (x_total - x_prefix).astype(float)          # Pr[X > w_i]
    alpha_bar = (x_prefix + max(0.0, 1.0 - float(x_total))).astype(float)
    beta = y_prefix.astype(float)                        # Pr[Y <= w_i]
    beta_bar = (y_suffix - pld.pmf_y.astype(ld) + ld(pld.delta_inf)).astype(float)
    # ascending-alpha assembly: the alpha=0 corner from the +inf atom, the
    # grid breakpoints, the point where the final -e^{w_0} segment meets
    # beta=0 (alpha = total X mass), then flat to (1, 0)
    x_tot = float(x_total)
    x_res = max(0.0, 1.0 - x_tot)
    # beta from the suffix complement where that side is better conditioned
    # (prefix sums saturate at 1.0 in float64 long before beta_bar vanishes)
    beta = np.where(beta_bar <= 0.5, 1.0 - beta_bar, beta)
    alpha = np.concatenate(([0.0], alpha[::-1], [min(x_tot, 1.0), 1.0]))
    beta = np.concatenate(([1.0 - pld.delta_inf], beta[::-1], [0.0, 0.0]))
    alpha_bar = np.concatenate(([1.0], alpha_bar[::-1], [x_res, 0.0]))
    beta_bar = np.concatenate(([pld.delta_inf], beta_bar[::-1], [1.0, 1.0]))
    # composition noise can push the X total a few ulp past 1; clamp and
    # restore monotonicity, guarding against anything beyond noise scale
    alpha = np.clip(alpha, 0.0, 1.0)
    fixed = np.maximum.accumulate(alpha)
    drift = float(np.max(fixed - alpha))
    if drift > 1e-8:
        raise NumericalInstabilityError(
            f"alpha breakpoints non-monotone by {drift:.3e}"
        )
    alpha = fixed
    # restore descending-alpha order
    alpha, beta = alpha[::-1], beta[::-1]
    alpha_bar, beta_bar = alpha_bar[::-1], beta_bar[::-1]
    if prune:
        alpha, beta, alpha_bar, beta_bar = _prune_colinear(
            alpha, beta, alpha_bar, beta_bar
        )
    return TradeoffCurve(alpha, beta, alpha_bar, beta_bar)


def eval_tradeoff(curve: TradeoffCurve, alpha) -> float | np.ndarray:
    """Linear interpolation between breakpoints; exact at breakpoints."""
    scalar = np.isscalar(alpha)
    a = np.clip(np.atleast_1d(np.asarray(alpha, dtype=float)), 0.0, 1.0)
    # np.interp needs ascending x
    out = np.interp(a, curve.alpha[::-1], curve.beta[::-1])
    return float(out[0]) if scalar else out


def tradeoff_from_profile(
    profile: PrivacyProfile,
    eps_grid: np.ndarray | None = None,
    n_alpha: int = 4001,
    symmetric: bool = True,
) -> TradeoffCurve:
    """Upper envelope of the f_{eps, delta(eps)} curves over an eps grid.

    A valid lower bound on the exact trade-off curve, converging as the
    grid refines.  The default grid spans [-30, 30] with 4001 log-ish
    spaced points.

    ``symmetric`` keeps the mirrored envelope branch e^-eps (1 - d - a).
    For a profile that certifies both adjacency directions the branch is
    redundant on a sign-symmetric grid (it equals the first branch at
    -eps); for a one-directional profile it would overstate the curve, so
    pass ``symmetric=False`` there.
    """
    from scipy import special

    if eps_grid is None:
        pos = np.logspace(-4, np.log10(30.0), 2000)
        eps_grid = np.unique(np.concatenate((-pos, [0.0], pos)))
    eps_grid = np.asarray(eps_grid, dtype=float)
    if eps_grid.ndim != 1 or eps_grid.size == 0:
        raise InvalidParamError("eps_grid must be a nonempty 1-D array")
    if np.any(np.diff(eps_grid) < 0):
        raise InvalidParamError("eps_grid must be sorted")
    d = np.asarray(profile.evaluate(eps_grid), dtype=float)
    # alpha sampling dense near the corners, where curve curvature blows up
    corner = special.ndtr(np.linspace(-12.0, 12.0, 3 * n_alpha))
    alphas = np.unique(np.concatenate((np.linspace(0.0, 1.0, n_alpha), corner)))
    ee = np.exp(np.minimum(eps_grid, 700.0))
    een = np.exp(np.minimum(-eps_grid, 700.0))
    # f(a) = sup_eps max{0, 1 - d - e^eps a, e^-eps (1 - d - a)}
    betas = np.empty_like(alphas)
    block = 256
    for i in range(0, len(alphas), block):
        a = alphas[i : i + block, None]
        best = ((1.0 - d)[None, :] - ee[None, :] * a).max(axis=1)
        if symmetric:
            branch2 = (een[None, :] * ((1.0 - d)[None, :] - a)).max(axis=1)
            best = np.maximum(best, branch2)
        betas[i : i + block] = np.maximum(best, 0.0)
    # 1 - delta loses precision once delta is within an ulp of 1, which the
    # e^{-eps} amplification can push above the diagonal; clip to validity
    betas = np.minimum(betas, 1.0 - alphas)
    order = np.argsort(alphas)[::-1]
    return TradeoffCurve(alphas[order], betas[order])
