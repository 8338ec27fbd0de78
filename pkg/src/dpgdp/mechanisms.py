"""Privacy profiles and exact PLDs for the base mechanisms.

All noise scales are per unit L2/L1 sensitivity.  Every profile here is the
exact hockey-stick divergence of the mechanism's dominating pair, evaluated
in a numerically stable form (log-space where the two terms nearly cancel).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np
from scipy import special

from .errors import InvalidParamError
from .pld import DiscretePLD, LossGrid, PrivacyProfile, _snap_up

KINDS = ("gaussian", "subsampled_gaussian", "laplace", "randomized_response", "adp_point")
DIRECTIONS = ("add", "remove", "pessimistic_both")


@dataclass(frozen=True)
class MechanismSpec:
    """Parametric description of one base mechanism.

    Only the fields required by ``kind`` are read; the rest are ignored.
    ``direction`` selects the neighbouring-relation side for subsampling
    (add/remove) or the safe pointwise maximum of both.
    """

    kind: str
    sigma: Optional[float] = None
    q: Optional[float] = None
    b: Optional[float] = None
    eps: Optional[float] = None
    delta: Optional[float] = None
    direction: str = "pessimistic_both"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParamError(f"unknown mechanism kind {self.kind!r}")
        if self.direction not in DIRECTIONS:
            raise InvalidParamError(f"unknown direction {self.direction!r}")
        need = {
            "gaussian": ("sigma",),
            "subsampled_gaussian": ("sigma", "q"),
            "laplace": ("b",),
            "randomized_response": ("eps",),
            "adp_point": ("eps", "delta"),
        }[self.kind]
        for name in need:
            value = getattr(self, name)
            if value is None or not math.isfinite(float(value)):
                raise InvalidParamError(f"{self.kind} requires finite {name}")
        if self.kind in ("gaussian", "subsampled_gaussian") and self.sigma <= 0:
            raise InvalidParamError(f"sigma must be positive, got {self.sigma}")
        if self.kind == "subsampled_gaussian" and not (0.0 <= self.q <= 1.0):
            raise InvalidParamError(f"sampling rate must be in [0, 1], got {self.q}")
        if self.kind == "laplace" and self.b <= 0:
            raise InvalidParamError(f"scale b must be positive, got {self.b}")
        if self.kind in ("randomized_response", "adp_point") and self.eps < 0:
            raise InvalidParamError(f"eps must be nonnegative, got {self.eps}")
        if self.kind == "adp_point" and not (0.0 <= self.delta <= 1.0):
            raise InvalidParamError(f"delta must be in [0, 1], got {self.delta}")

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, payload: dict) -> "MechanismSpec":
        allowed = {"kind", "sigma", "q", "b", "eps", "delta", "direction"}
        unknown = set(payload) - allowed
        if unknown:
            raise InvalidParamError(f"unknown mechanism fields: {sorted(unknown)}")
        return cls(**payload)


def gaussian_hockey_stick(mu, eps):
    """Phi(mu/2 - eps/mu) - e^eps Phi(-mu/2 - eps/mu), stable for any eps.

    Computed as exp(log Phi(a)) * -expm1(eps + log Phi(b) - log Phi(a));
    the exponent is always <= 0 so the cancellation between the two CDF
    terms happens inside a single expm1.
    """
    eps = np.asarray(eps, dtype=float)
    a = mu / 2.0 - eps / mu
    b = -mu / 2.0 - eps / mu
    log_a = special.log_ndtr(a)
    log_b = special.log_ndtr(b)
    expo = np.minimum(eps + log_b - log_a, 0.0)
    return np.clip(np.exp(log_a) * (-np.expm1(expo)), 0.0, 1.0)


def gaussian_profile(mu: float) -> PrivacyProfile:
    """Profile of distinguishing N(0,1) from N(mu,1)."""
    if mu < 0 or not math.isfinite(mu):
        raise InvalidParamError(f"mu must be nonnegative, got {mu}")
    if mu == 0.0:
        return PrivacyProfile(
            lambda eps: np.maximum(0.0, -np.expm1(np.minimum(eps, 0.0))),
            name="gaussian(mu=0)",
            loss_lower=0.0,
            loss_upper=0.0,
        )
    return PrivacyProfile(
        lambda eps: gaussian_hockey_stick(mu, eps), name=f"gaussian(mu={mu:g})"
    )


def _subsampled_remove(sigma: float, q: float, eps: np.ndarray) -> np.ndarray:
    """sup_E Q(E) - e^eps P(E) for P = N(0, s^2), Q = (1-q) P + q N(1, s^2).

    The likelihood ratio r(x) = (1-q) + q e^{(2x-1)/(2s^2)} is increasing,
    so the optimal event is a half-line and the divergence reduces to
    q * gaussian_hockey_stick(1/s, log((e^eps - (1-q))/q)).
    """
    mu_g = 1.0 / sigma
    with np.errstate(over="ignore"):
        a_term = q + np.expm1(eps)  # e^eps - (1 - q)
    out = np.where(a_term <= 0, -np.expm1(eps), 1.0)
    pos = a_term > 0
    big = eps > 500.0
    eg = np.where(pos, np.log(np.where(pos, a_term, 1.0)) - np.log(q), 0.0)
    eg = np.where(big, eps - np.log(q), eg)
    return np.where(pos, q * gaussian_hockey_stick(mu_g, eg), out)


def _subsampled_add(sigma: float, q: float, eps: np.ndarray) -> np.ndarray:
    """sup_E P(E) - e^eps Q(E) for the same pair (hypotheses swapped)."""
    mu_g = 1.0 / sigma
    with np.errstate(over="ignore"):
        b_term = q + np.expm1(-eps)  # e^-eps - (1 - q)
    pos = b_term > 0
    small = eps < -500.0
    eg = np.where(pos, np.log(np.where(pos, b_term, 1.0)) - np.log(q), 0.0)
    eg = np.where(small, -eps - np.log(q), eg)
    coef = np.maximum(q - (1.0 - q) * np.expm1(eps), 0.0)  # 1 - (1-q) e^eps
    return np.where(pos, coef * gaussian_hockey_stick(mu_g, -eg), 0.0)


def subsampled_gaussian_profile(
    sigma: float, q: float, direction: str = "pessimistic_both"
) -> PrivacyProfile:
    """Profile of the Poisson-subsampled Gaussian mechanism.

    ``remove`` treats the record-free distribution as the null hypothesis,
    ``add`` swaps the two, and ``pessimistic_both`` is their pointwise max
    (a valid profile for the symmetric neighbouring relation).
    """
    if sigma <= 0:
        raise InvalidParamError(f"sigma must be positive, got {sigma}")
    if not (0.0 <= q <= 1.0):
        raise InvalidParamError(f"sampling rate must be in [0, 1], got {q}")
    if direction not in DIRECTIONS:
        raise InvalidParamError(f"unknown direction {direction!r}")
    if q == 0.0:
        return PrivacyProfile(
            lambda eps: np.maximum(0.0, -np.expm1(np.minimum(eps, 0.0))),
            name="subsampled_gaussian(q=0)",
            loss_lower=0.0,
            loss_upper=0.0,
        )
    name = f"subsampled_gaussian(sigma={sigma:g}, q={q:g}, {direction})"
    if direction == "remove":
        # loss under Q is bounded below by log(1-q)
        lower = math.log1p(-q) if q < 1 else None
        return PrivacyProfile(
            lambda eps: _subsampled_remove(sigma, q, eps), name, loss_lower=lower
        )
    if direction == "add":
        upper = -math.log1p(-q) if q < 1 else None
        return PrivacyProfile(
            lambda eps: _subsampled_add(sigma, q, eps), name, loss_upper=upper
        )
    return PrivacyProfile(
        lambda eps: np.maximum(
            _subsampled_remove(sigma, q, eps), _subsampled_add(sigma, q, eps)
        ),
        name,
    )


def laplace_profile(b: float) -> PrivacyProfile:
    """Profile of Lap(0, b) vs Lap(1, b); symmetric in the two hypotheses."""
    if b <= 0:
        raise InvalidParamError(f"scale b must be positive, got {b}")
    inv_b = 1.0 / b

    def evaluate(eps):
        eps = np.asarray(eps, dtype=float)
        mid = np.maximum(0.0, -np.expm1((eps - inv_b) / 2.0))
        return np.where(eps <= -inv_b, -np.expm1(eps), mid)

    return PrivacyProfile(
        evaluate, name=f"laplace(b={b:g})", loss_lower=-inv_b, loss_upper=inv_b
    )


def adp_point_profile(eps0: float, delta0: float) -> PrivacyProfile:
    """Tight profile of a mechanism known only to be (eps0, delta0)-DP.

    This is the hockey-stick curve of the canonical four-outcome pair; it
    plateaus at delta0 for large eps, so no finite GDP parameter exists
    whenever delta0 > 0.
    """
    if eps0 < 0 or not (0.0 <= delta0 <= 1.0):
        raise InvalidParamError("need eps0 >= 0 and delta0 in [0, 1]")
    scale = (1.0 - delta0) / (1.0 + math.exp(eps0))

    def evaluate(eps):
        eps = np.asarray(eps, dtype=float)
        with np.errstate(over="ignore"):
            mid = np.maximum(np.exp(eps0) - np.exp(eps), 0.0)
            low = np.maximum(-np.expm1(eps + eps0), 0.0)
        return delta0 + scale * (mid + low)

    return PrivacyProfile(
        evaluate,
        name=f"adp_point(eps={eps0:g}, delta={delta0:g})",
        loss_lower=-eps0,
        loss_upper=eps0,
    )


def randomized_response_pld(eps: float, grid_step: float) -> DiscretePLD:
    """Exact two-atom PLD of randomized response with budget eps.

    Atoms land on the smallest grid multiples >= their true losses, so any
    off-grid placement only rounds the loss up (pessimistic).
    """
    if eps < 0:
        raise InvalidParamError(f"eps must be nonnegative, got {eps}")
    if grid_step <= 0:
        raise InvalidParamError(f"grid_step must be positive, got {grid_step}")
    p_hi = 1.0 / (1.0 + math.exp(-eps))  # e^eps / (1 + e^eps)
    p_lo = 1.0 - p_hi
    if eps == 0.0:
        return DiscretePLD(LossGrid(0.0, grid_step, 1), np.array([1.0]), 0.0)
    i_hi = _snap_up(eps, grid_step)
    i_lo = _snap_up(-eps, grid_step)
    grid = LossGrid(i_lo * grid_step, grid_step, i_hi - i_lo + 1)
    pmf = np.zeros(grid.count)
    pmf[0] = p_lo
    pmf[-1] = p_hi
    return DiscretePLD(grid, pmf, 0.0)


def adp_tradeoff(eps: float, delta: float):
    """Trade-off curve f_{eps,delta} of a single approximate-DP guarantee."""
    from .pld import TradeoffCurve

    if not (0.0 <= delta <= 1.0):
        raise InvalidParamError(f"delta must be in [0, 1], got {delta}")
    if eps < 0:
        raise InvalidParamError(f"eps must be nonnegative, got {eps}")
    if eps == 0.0:
        return TradeoffCurve(
            np.array([1.0, 1.0 - delta, 0.0]), np.array([0.0, 0.0, 1.0 - delta])
        )
    # kink where 1 - delta - e^eps a meets e^-eps (1 - delta - a); expm1
    # keeps the ratio finite for arbitrarily small positive eps
    a_kink = (
        (1.0 - delta)
        * (-math.expm1(-eps))
        / (math.expm1(eps) - math.expm1(-eps))
    )
    b_kink = max((1.0 - delta) - math.exp(eps) * a_kink, 0.0)
    alpha = np.array([1.0, 1.0 - delta, a_kink, 0.0])
    beta = np.array([0.0, 0.0, b_kink, 1.0 - delta])
    return TradeoffCurve(alpha, beta)


def pure_dp_to_gdp(eps: float) -> float:
    """Smallest mu such that every eps-DP mechanism is mu-GDP."""
    if eps < 0:
        raise InvalidParamError(f"eps must be nonnegative, got {eps}")
    return float(-2.0 * special.ndtri(1.0 / (math.exp(eps) + 1.0)))


def directional_profiles(spec: MechanismSpec) -> list[PrivacyProfile]:
    """Profiles to account separately, one per adjacency direction.

    Symmetric mechanisms yield a single profile.  For the subsampled
    Gaussian under ``pessimistic_both`` the two directions are returned
    individually: composing each and taking the worst final answer is both
    safe and strictly tighter than composing the pointwise-max profile.
    """
    if spec.kind == "gaussian":
        return [gaussian_profile(1.0 / spec.sigma)]
    if spec.kind == "laplace":
        return [laplace_profile(spec.b)]
    if spec.kind == "adp_point":
        return [adp_point_profile(spec.eps, spec.delta)]
    if spec.kind == "subsampled_gaussian":
        if spec.direction == "pessimistic_both":
            return [
                subsampled_gaussian_profile(spec.sigma, spec.q, "remove"),
                subsampled_gaussian_profile(spec.sigma, spec.q, "add"),
            ]
        return [subsampled_gaussian_profile(spec.sigma, spec.q, spec.direction)]
    raise InvalidParamError(
        f"mechanism kind {spec.kind!r} has no profile form; use its exact PLD"
    )
