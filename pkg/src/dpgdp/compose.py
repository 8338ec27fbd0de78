"""Composition of discrete privacy-loss distributions.

Pairwise composition is a linear convolution of the Y mass functions.
T-fold self-composition runs in the frequency domain: one forward FFT,
a pointwise T-th power, one inverse FFT, evaluated on a window chosen by
Chernoff bounds so that the mass outside is certifiably negligible.  Mass
above the window is folded into the infinite-loss atom and mass below it
onto the lowest retained point; both directions only increase the implied
profile, so truncation never breaks pessimism.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import GridOverflowError, InvalidParamError, NumericalInstabilityError
from .pld import DiscretePLD, LossGrid, _absorb_negative_mass, require_same_step

MAX_GRID_POINTS = 2**27
# per-entry negative FFT output tolerated before declaring instability
RINGING_TOL = 1e-14
# default certified bound on composed mass outside the retained window
WINDOW_TAIL_BUDGET = 1e-13


def _log_mgf(omega: np.ndarray, pmf: np.ndarray, lams: np.ndarray) -> np.ndarray:
    """log E[e^{lam Y}; Y finite] for each lam, by stable log-sum-exp."""
    mask = pmf > 0
    w = omega[mask]
    p = pmf[mask]
    out = np.empty(len(lams))
    for i, lam in enumerate(lams):
        v = lam * w
        top = v.max()
        s = float(np.sum(p * np.exp(v - top)))
        out[i] = top + math.log(s) if s > 0 else -math.inf
    return out


def _composed_window(pld: DiscretePLD, t: int, tail: float) -> tuple[int, int, float, float]:
    """Integer index range [g_lo, g_hi] of the t-fold composition window plus
    the certified Chernoff bounds on the mass outside each end."""
    h = pld.grid.step
    w = pld.grid.points
    p = pld.pmf_y
    lams = np.geomspace(1e-2, 4e2, 120)
    k_pos = _log_mgf(w, p, lams)
    k_neg = _log_mgf(w, p, -lams)
    log_tail = math.log(1.0 / tail)
    cand_hi = np.where(np.isfinite(k_pos), (t * k_pos + log_tail) / lams, np.inf)
    cand_lo = np.where(np.isfinite(k_neg), -(t * k_neg + log_tail) / lams, -np.inf)
    mask = p > 0
    mean = float(np.sum(w[mask] * p[mask]) / np.sum(p[mask]))
    a_hi = float(np.clip(np.min(cand_hi), mean * t + 2 * h, t * w[-1]))
    a_lo = float(np.clip(np.max(cand_lo), t * w[0], mean * t - 2 * h))
    g_lo = int(math.floor(a_lo / h))
    g_hi = int(math.ceil(a_hi / h))
    with np.errstate(invalid="ignore"):
        bound_hi = float(np.exp(np.min(
            np.where(np.isfinite(k_pos), t * k_pos - lams * (g_hi * h), np.inf)
        )))
        bound_lo = float(np.exp(np.min(
            np.where(np.isfinite(k_neg), t * k_neg + lams * (g_lo * h), np.inf)
        )))
    return g_lo, g_hi, bound_lo, bound_hi


def _fold_outside(pmf, target_mass, bound_lo, bound_hi):
    """Split unaccounted mass between the two tails in proportion to the
    certified bounds: below-window mass joins the lowest point, above-window
    mass the infinite atom."""
    outside = max(float(target_mass) - float(np.sum(pmf.astype(np.longdouble))), 0.0)
    denom = bound_lo + bound_hi
    frac_lo = bound_lo / denom if denom > 0 else 0.0
    # never attribute more mass below the window than certified; the rest
    # goes to the infinite atom, which is the pessimistic direction
    lump_lo = min(outside * frac_lo, bound_lo)
    pmf[0] += lump_lo
    return outside - lump_lo


def self_compose(
    pld: DiscretePLD,
    t: int,
    strategy: str = "fft",
    tail_budget: float = WINDOW_TAIL_BUDGET,
    max_points: int = MAX_GRID_POINTS,
) -> DiscretePLD:
    """Distribution of the sum of ``t`` independent copies of the loss."""
    if t < 1:
        raise InvalidParamError(f"composition count must be >= 1, got {t}")
    if t == 1:
        return pld
    if strategy == "square":
        return _self_compose_squaring(pld, t, tail_budget, max_points)
    if strategy != "fft":
        raise InvalidParamError(f"unknown strategy {strategy!r}")

    h = pld.grid.step
    g_lo, g_hi, bound_lo, bound_hi = _composed_window(pld, t, tail_budget)
    n_win = g_hi - g_lo + 1
    if n_win > max_points:
        raise GridOverflowError(
            f"composition window needs {n_win} points (> {max_points}); "
            "coarsen the grid step or lower the composition count"
        )
    n_fft = 1 << int(math.ceil(math.log2(max(n_win, pld.grid.count))))
    buf = np.zeros(n_fft)
    buf[: pld.grid.count] = pld.pmf_y
    spec = np.fft.rfft(buf)
    mag = np.abs(spec)
    ang = np.angle(spec)
    with np.errstate(divide="ignore"):
        log_mag = np.where(mag > 0, np.log(mag), -np.inf)
    powered = np.exp(t * log_mag) * np.exp(1j * (t * ang))
    conv = np.fft.irfft(powered, n=n_fft)
    # composed index m is relative to t * start_index; wrap modulo n_fft.
    # Wrapped-in mass is bounded by the certified tails and lands at lower
    # positions than its origin, which the delta_inf fold compensates.
    base = t * pld.grid.start_index
    idx = np.arange(g_lo - base, g_hi - base + 1) % n_fft
    pmf = conv[idx]
    worst_neg = float(pmf.min())
    if worst_neg < -RINGING_TOL:
        raise NumericalInstabilityError(
            f"FFT ringing produced negative mass {worst_neg:.3e} < -{RINGING_TOL:g}"
        )
    pmf, _ = _absorb_negative_mass(pmf)
    target = float((1.0 - np.longdouble(pld.delta_inf)) ** t)
    inf_extra = _fold_outside(pmf, target, bound_lo, bound_hi)
    delta_inf = 1.0 - target + inf_extra
    return DiscretePLD(LossGrid(g_lo * h, h, n_win), pmf, delta_inf)


def compose(
    a: DiscretePLD,
    b: DiscretePLD,
    window: tuple[float, float] | None = None,
) -> DiscretePLD:
    """Pairwise composition (full linear convolution of the finite parts).

    ``window`` optionally truncates the result to [w_min, w_max] with the
    usual pessimistic folds.
    """
    require_same_step(a.grid, b.grid)
    h = a.grid.step
    n_out = a.grid.count + b.grid.count - 1
    if n_out > MAX_GRID_POINTS:
        raise GridOverflowError(f"convolution needs {n_out} points")
    n_fft = 1 << int(math.ceil(math.log2(max(n_out, 2))))
    fa = np.fft.rfft(a.pmf_y, n_fft)
    fb = np.fft.rfft(b.pmf_y, n_fft)
    conv = np.fft.irfft(fa * fb, n=n_fft)[:n_out]
    worst_neg = float(conv.min())
    if worst_neg < -RINGING_TOL:
        raise NumericalInstabilityError(
            f"FFT ringing produced negative mass {worst_neg:.3e}"
        )
    conv, _ = _absorb_negative_mass(conv)
    start_index = a.grid.start_index + b.grid.start_index
    delta_inf = 1.0 - (1.0 - a.delta_inf) * (1.0 - b.delta_inf)
    target = 1.0 - delta_inf
    # exact normalization of float drift
    total = float(np.sum(conv.astype(np.longdouble)))
    if total > 0:
        conv *= target / total
    grid = LossGrid(start_index * h, h, n_out)
    out = DiscretePLD(grid, conv, delta_inf)
    if window is not None:
        out = truncate(out, window[0], window[1])
    return out


def truncate(pld: DiscretePLD, w_min: float, w_max: float) -> DiscretePLD:
    """Restrict to [w_min, w_max]: mass above joins delta_inf, mass below
    the lowest retained point (both pessimistic)."""
    w = pld.grid.points
    lo = int(np.searchsorted(w, w_min - 1e-9 * pld.grid.step, side="left"))
    hi = int(np.searchsorted(w, w_max + 1e-9 * pld.grid.step, side="right")) - 1
    if hi < lo:
        raise InvalidParamError("empty truncation window")
    ld = np.longdouble
    below = float(np.sum(pld.pmf_y[:lo].astype(ld)))
    above = float(np.sum(pld.pmf_y[hi + 1 :].astype(ld)))
    pmf = pld.pmf_y[lo : hi + 1].copy()
    pmf[0] += below
    grid = LossGrid(w[lo], pld.grid.step, hi - lo + 1)
    return DiscretePLD(grid, pmf, pld.delta_inf + above)


def _self_compose_squaring(
    pld: DiscretePLD, t: int, tail_budget: float, max_points: int
) -> DiscretePLD:
    """Binary-exponentiation cross-check path (mass-space convolutions),
    truncated to the same certified window as the FFT path."""
    g_lo, g_hi, bound_lo, bound_hi = _composed_window(pld, t, tail_budget)
    if g_hi - g_lo + 1 > max_points:
        raise GridOverflowError("composition window exceeds the size cap")
    h = pld.grid.step
    w_lo, w_hi = g_lo * h, g_hi * h

    def clip(x: DiscretePLD) -> DiscretePLD:
        lo = max(x.grid.start, w_lo - 1e-9)
        hi = min(x.grid.last, w_hi + 1e-9)
        return truncate(x, lo, hi)

    acc: DiscretePLD | None = None
    base = pld
    k = t
    while k > 0:
        if k & 1:
            acc = base if acc is None else clip(compose(acc, base))
        k >>= 1
        if k:
            base = clip(compose(base, base))
    assert acc is not None
    # align the bookkeeping with the FFT path: everything outside the
    # final window is already folded by the running truncation
    return acc
