"""Discrete privacy-loss distributions and their pessimistic construction.

The central object is :class:`DiscretePLD`: the probability mass function of
the privacy-loss random variable Y = log(Q(o)/P(o)), o ~ Q, on a uniform
grid of loss values, plus an atom at +infinity.  The mass function of the
companion variable X (same log-ratio, o ~ P) is implied pointwise by
Pr[X = w] = e^{-w} Pr[Y = w].

:func:`discretize_ctd` turns any evaluable privacy profile delta(eps) into
such a PLD by the connect-the-dots rule: the implied profile of the output
agrees with the input exactly at every grid point and, because a true
profile is convex in e^eps while the discrete one is piecewise linear in
e^eps, lies at or above it everywhere else.  The construction is therefore
safe (pessimistic) to report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    GridMismatchError,
    InvalidParamError,
    NonmonotoneProfileError,
    NumericalInstabilityError,
)

# Total negative mass produced by cancellation in the second-difference
# formula that we are willing to repair silently.  In double precision the
# noise floor is ~ n_points * ulp(delta) / step, which for 1e-4 grids sits
# well above the 1e-10 one might naively budget.
NEG_MASS_BUDGET = 1e-7

# Profile values below this are treated as exact zeros.
UNDERFLOW_FLOOR = 1e-300


@dataclass(frozen=True)
class LossGrid:
    """Uniform grid w_i = start + i*step of privacy-loss values (nats).

    ``start`` is kept aligned to an integer multiple of ``step`` so that
    grids produced for different mechanisms convolve without resampling.
    """

    start: float
    step: float
    count: int

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise InvalidParamError(f"grid step must be positive, got {self.step}")
        if self.count < 1:
            raise InvalidParamError(f"grid count must be >= 1, got {self.count}")
        k = round(self.start / self.step)
        if abs(self.start - k * self.step) > 1e-9 * self.step:
            raise InvalidParamError(
                "grid start must be an integer multiple of step "
                f"(got start={self.start}, step={self.step})"
            )
        # normalize away representation error so composition offsets are exact
        object.__setattr__(self, "start", k * self.step)

    @property
    def start_index(self) -> int:
        return round(self.start / self.step)

    @property
    def points(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)

    @property
    def last(self) -> float:
        return self.start + self.step * (self.count - 1)

    def aligned_with(self, other: "LossGrid") -> bool:
        return abs(self.step - other.step) <= 1e-12 * self.step


class PrivacyProfile:
    """An evaluable map eps -> delta(eps), nonincreasing and convex in e^eps.

    ``loss_lower`` / ``loss_upper`` are optional hard support bounds of the
    underlying loss variable; grid selection uses them to avoid probing far
    beyond the support.
    """

    def __init__(
        self,
        evaluate: Callable[[np.ndarray], np.ndarray],
        name: str = "profile",
        loss_lower: Optional[float] = None,
        loss_upper: Optional[float] = None,
    ):
        self._evaluate = evaluate
        self.name = name
        self.loss_lower = loss_lower
        self.loss_upper = loss_upper

    def evaluate(self, eps):
        eps_arr = np.asarray(eps, dtype=float)
        out = np.clip(self._evaluate(eps_arr), 0.0, 1.0)
        out = np.where(out < UNDERFLOW_FLOOR, 0.0, out)
        if np.isscalar(eps) or eps_arr.ndim == 0:
            return float(np.asarray(out).reshape(-1)[0])
        return np.asarray(out).reshape(eps_arr.shape)

    def __repr__(self):
        return f"PrivacyProfile({self.name})"


@dataclass(frozen=True)
class TradeoffCurve:
    """Piecewise-linear trade-off curve as breakpoints with alpha descending.

    ``alpha_bar`` and ``beta_bar`` are the complements 1 - alpha and
    1 - beta carried explicitly: near the corners they hold precision that
    the direct values cannot (1 - 1e-17 rounds to 1.0 in a double).
    """

    alpha: np.ndarray
    beta: np.ndarray
    alpha_bar: Optional[np.ndarray] = None
    beta_bar: Optional[np.ndarray] = None

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        b = np.asarray(self.beta, dtype=float)
        if a.shape != b.shape or a.ndim != 1 or a.size < 2:
            raise InvalidParamError("curve needs matching 1-D alpha/beta arrays")
        if np.any(np.diff(a) > 0):
            raise InvalidParamError("alpha breakpoints must be decreasing")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        if self.alpha_bar is None:
            object.__setattr__(self, "alpha_bar", 1.0 - a)
        if self.beta_bar is None:
            object.__setattr__(self, "beta_bar", 1.0 - b)

    @property
    def breakpoints(self) -> np.ndarray:
        return np.column_stack((self.alpha, self.beta))

    def f_zero(self) -> float:
        """f(0), i.e. beta at alpha = 0 (the final, smallest-alpha breakpoint
        in the descending storage is the authoritative corner)."""
        if self.alpha[-1] == 0.0:
            return float(self.beta[-1])
        return float(np.interp(0.0, self.alpha[::-1], self.beta[::-1]))

    def corner_residual(self) -> float:
        """Mass at infinite loss as encoded in the alpha = 0 corner."""
        return float(self.beta_bar[-1]) if self.alpha[-1] == 0.0 else 0.0


@dataclass
class DiscretePLD:
    """PMF of the loss variable Y on a uniform grid plus mass at +infinity."""

    grid: LossGrid
    pmf_y: np.ndarray
    delta_inf: float
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        p = np.ascontiguousarray(self.pmf_y, dtype=float)
        if p.ndim != 1 or p.size != self.grid.count:
            raise InvalidParamError("pmf_y length must equal grid count")
        if np.any(p < 0):
            raise InvalidParamError("pmf_y must be nonnegative")
        if not (0.0 <= self.delta_inf <= 1.0):
            raise InvalidParamError(f"delta_inf out of range: {self.delta_inf}")
        total = float(np.sum(p.astype(np.longdouble))) + self.delta_inf
        if abs(total - 1.0) > 1e-10:
            raise NumericalInstabilityError(
                f"PLD mass {total} deviates from 1 beyond tolerance"
            )
        self.pmf_y = p

    # -- lazily computed, order-stable partial sums (long double) ----------

    def _sums(self):
        """Suffix sums of Y-mass, e^{-w}-weighted Y-mass, and X-mass prefix."""
        cached = self._cache.get("sums")
        if cached is not None:
            return cached
        ld = np.longdouble
        w = self.grid.points.astype(ld)
        p = self.pmf_y.astype(ld)
        x = np.exp(-w) * p
        y_suffix = np.cumsum(p[::-1])[::-1]
        yx_suffix = np.cumsum(x[::-1])[::-1]
        y_prefix = np.cumsum(p)
        x_prefix = np.cumsum(x)
        cached = (y_suffix, yx_suffix, y_prefix, x_prefix)
        self._cache["sums"] = cached
        return cached

    def x_mass_total(self) -> float:
        return float(self._sums()[3][-1])

    def x_residual(self) -> float:
        """Mass of X at -infinity (whatever e^{-w}-weighting cannot reach)."""
        return max(0.0, 1.0 - self.x_mass_total())


def plrv_x_masses(pld: DiscretePLD) -> tuple[np.ndarray, float]:
    """Masses Pr[X = w_i] = e^{-w_i} Pr[Y = w_i] and the residual at -inf."""
    x = np.exp(-pld.grid.points) * pld.pmf_y
    total = float(np.sum(x.astype(np.longdouble)))
    # deep negative-loss windows amplify per-entry FFT noise by e^{|w|};
    # the tolerance must absorb that, not just summation round-off
    if total > 1.0 + 1e-8:
        raise NumericalInstabilityError(
            f"X masses sum to {total} > 1; PLD violates the likelihood-ratio "
            "identity"
        )
    return x, max(0.0, 1.0 - total)


def _absorb_negative_mass(p: np.ndarray) -> tuple[np.ndarray, float]:
    """Zero out negative entries by borrowing from lower-index masses.

    Works on reversed cumulative sums so the repair moves mass toward
    *larger* losses only, which can only increase the implied delta(eps)
    and therefore preserves pessimism.  Returns the repaired array and the
    total negative mass that was absorbed.
    """
    neg = p < 0
    if not np.any(neg):
        return p, 0.0
    moved = float(-p[neg].sum())
    rev = p[::-1]
    cs = np.concatenate(([0.0], np.cumsum(rev)))
    cs_mono = np.maximum.accumulate(cs)
    fixed = np.diff(cs_mono)[::-1].copy()
    excess = float(fixed.sum() - p.sum())
    if excess > 0:
        # negatives at the very bottom had nothing below to borrow from;
        # take the surplus back out of the lowest masses
        cs = np.cumsum(fixed)
        k = int(np.searchsorted(cs, excess))
        if k >= len(fixed):
            fixed[:] = 0.0
        else:
            fixed[:k] = 0.0
            fixed[k] = cs[k] - excess
    return fixed, moved


def discretize_ctd(
    profile: PrivacyProfile,
    grid: LossGrid,
    neg_mass_budget: float = NEG_MASS_BUDGET,
) -> DiscretePLD:
    """Connect-the-dots discretization of a privacy profile onto a grid.

    The output PLD's implied profile equals ``profile`` at every grid point
    and dominates it in between; all mass below the grid is rounded up onto
    the first point and delta_inf absorbs everything above the last point.
    """
    if grid.count < 2:
        raise InvalidParamError("discretization needs at least 2 grid points")
    w = grid.points
    d = np.asarray(profile.evaluate(w), dtype=float)
    fd = d[:-1] - d[1:]
    if np.any(fd < -1e-12):
        worst = float(fd.min())
        raise NonmonotoneProfileError(
            f"profile increases with eps by {-worst:.3e} (> 1e-12) near "
            f"w = {w[int(np.argmin(fd))]:.6g}"
        )
    np.maximum(fd, 0.0, out=fd)
    delta_inf = float(d[-1])
    h = grid.step
    c_lo = -math.expm1(-h)  # 1 - e^-h
    c_hi = math.expm1(h)    # e^h - 1
    p = np.empty(grid.count)
    p[1:-1] = fd[:-1] / c_lo - fd[1:] / c_hi
    p[-1] = fd[-1] / c_lo
    p[0] = 0.0
    head = 1.0 - delta_inf - float(np.sum(p[1:].astype(np.longdouble)))
    p[0] = head
    p, moved = _absorb_negative_mass(p)
    if moved > neg_mass_budget:
        raise NumericalInstabilityError(
            f"clamped negative mass {moved:.3e} exceeds budget "
            f"{neg_mass_budget:.1e}; profile evaluation is too noisy for "
            f"step {h:g}"
        )
    # exact mass normalization so T-fold powers cannot amplify a deficit
    total = float(np.sum(p.astype(np.longdouble)))
    if total > 0:
        p *= (1.0 - delta_inf) / total
    return DiscretePLD(grid, p, delta_inf)


def _snap_down(value: float, step: float) -> int:
    return int(math.floor(value / step + 1e-9))


def _snap_up(value: float, step: float) -> int:
    return int(math.ceil(value / step - 1e-9))


def choose_grid(
    profile: PrivacyProfile,
    step: float,
    compositions: int = 1,
    tail_tol: float = 1e-15,
    max_abs_loss: float = 1e5,
) -> LossGrid:
    """Pick a grid wide enough that the loss mass outside it is negligible.

    The upper end W satisfies  Pr[Y > W] <= tail_tol / compositions, using
    delta(W - g) >= Pr[Y > W] (1 - e^-g);  the lower end uses the mirrored
    bound through the X variable, Pr[Y < w] <= e^w Pr[X < w].  Profiles
    that plateau at a positive value (mechanisms with genuine failure mass)
    stop expanding once the plateau is detected; the plateau then lands in
    delta_inf.
    """
    if step <= 0:
        raise InvalidParamError("step must be positive")
    tau = tail_tol / max(compositions, 1)
    guard = 0.5
    damp = -math.expm1(-guard)  # 1 - e^-guard

    def upper_ok(w: float) -> bool:
        return float(profile.evaluate(w)) <= tau * damp

    w_hi = step * 8
    prev = float(profile.evaluate(w_hi))
    while not upper_ok(w_hi - guard) and w_hi < max_abs_loss:
        w_hi *= 1.5
        cur = float(profile.evaluate(w_hi))
        if prev > 0 and cur > prev * (1 - 1e-9) and cur > tau:
            break  # plateau: genuine infinity mass, stop expanding
        prev = cur
    if profile.loss_upper is not None:
        w_hi = min(w_hi, profile.loss_upper + 2 * step)

    def lower_ok(w: float) -> bool:
        # Pr[Y < w] <= e^w * Pr[X < w] <= e^w * delta(-w - guard) / damp
        bound = math.exp(w) * float(profile.evaluate(-w - guard)) / damp
        return bound <= tau or math.exp(w) <= tau

    w_lo = -step * 8
    while not lower_ok(w_lo) and w_lo > -max_abs_loss:
        w_lo *= 1.5
    if profile.loss_lower is not None:
        w_lo = max(w_lo, profile.loss_lower - 2 * step)

    i_lo = _snap_down(w_lo, step)
    i_hi = _snap_up(w_hi, step)
    if i_hi <= i_lo:
        i_hi = i_lo + 1
    return LossGrid(i_lo * step, step, i_hi - i_lo + 1)


def point_mass_pld(loss: float, step: float) -> DiscretePLD:
    """PLD of a deterministic loss, snapped up (pessimistically) onto a grid."""
    idx = _snap_up(loss, step)
    grid = LossGrid(idx * step, step, 1)
    return DiscretePLD(grid, np.array([1.0]), 0.0)


def require_same_step(a: LossGrid, b: LossGrid) -> None:
    if not a.aligned_with(b):
        raise GridMismatchError(
            f"grid steps differ: {a.step} vs {b.step}; rebuild the PLDs on a "
            "shared step before composing"
        )
