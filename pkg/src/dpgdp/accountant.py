"""End-to-end accounting pipeline shared by the CLI and the test suite.

A run takes a list of (MechanismSpec, count) pairs, builds one discrete PLD
per adjacency direction per mechanism, self-composes each by its count,
convolves across mechanisms, and reduces the per-direction trade-off
curves to a fitted GDP bound, its regret, and profile queries.  Mechanisms
whose two adjacency directions differ are tracked separately all the way
through; every reported number is the worst case over directions.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import reduce
from typing import Optional

import numpy as np

from . import compose as compose_mod
from . import curves as curves_mod
from . import gdpfit, regret as regret_mod, renyi
from .errors import InvalidParamError
from .mechanisms import MechanismSpec, directional_profiles, randomized_response_pld
from .pld import DiscretePLD, choose_grid, discretize_ctd

DEFAULT_GRID_STEP = 1e-4
# single-step tail mass budget; keeps the composed infinite-loss residual
# around 1e-12 for thousands of compositions
SINGLE_STEP_TAIL = 1e-15
REPRESENTATIONS = ("pure", "adp", "zcdp", "gdp", "rdp", "profile")


@dataclass(frozen=True)
class RunConfig:
    """One accounting run: mechanisms with repeat counts plus grid policy."""

    mechanisms: tuple[tuple[MechanismSpec, int], ...]
    grid_step: float = DEFAULT_GRID_STEP
    delta_query: Optional[float] = None

    def __post_init__(self):
        if not self.mechanisms:
            raise InvalidParamError("config needs at least one mechanism")
        for spec, count in self.mechanisms:
            if count < 1:
                raise InvalidParamError(f"count must be >= 1, got {count}")
        if not (self.grid_step > 0):
            raise InvalidParamError(f"grid_step must be positive, got {self.grid_step}")
        if self.delta_query is not None and not (0.0 < self.delta_query < 1.0):
            raise InvalidParamError(
                f"delta_query must be in (0, 1), got {self.delta_query}"
            )

    @classmethod
    def from_dict(cls, payload: dict) -> "RunConfig":
        allowed = {"mechanisms", "grid_step", "delta_query"}
        unknown = set(payload) - allowed - {"output"}
        if unknown:
            raise InvalidParamError(f"unknown config fields: {sorted(unknown)}")
        mechs = []
        for entry in payload.get("mechanisms", []):
            entry = dict(entry)
            count = int(entry.pop("count", 1))
            mechs.append((MechanismSpec.from_dict(entry), count))
        return cls(
            mechanisms=tuple(mechs),
            grid_step=float(payload.get("grid_step", DEFAULT_GRID_STEP)),
            delta_query=(
                float(payload["delta_query"])
                if payload.get("delta_query") is not None
                else None
            ),
        )

    def to_dict(self) -> dict:
        out = {
            "mechanisms": [
                {**spec.to_dict(), "count": count} for spec, count in self.mechanisms
            ],
            "grid_step": self.grid_step,
        }
        if self.delta_query is not None:
            out["delta_query"] = self.delta_query
        return out

    def total_steps(self) -> int:
        return sum(count for _, count in self.mechanisms)


@dataclass
class AccountResult:
    """Everything a run produces, before serialization."""

    config: RunConfig
    plds: list[DiscretePLD]
    curves: list
    bound: gdpfit.GdpBound
    regret: float
    epsilon_at_delta: Optional[float] = None
    delta_at_epsilon: Optional[float] = None

    @property
    def breakpoint_count(self) -> int:
        return int(sum(len(c.alpha) for c in self.curves))

    def exact_delta(self, eps) -> np.ndarray:
        """Pointwise-max profile over adjacency directions."""
        vals = [np.atleast_1d(curves_mod.delta_at(p, eps)) for p in self.plds]
        return reduce(np.maximum, vals)

    def eps_grid(self, n: int = 6001) -> np.ndarray:
        lo = min(p.grid.start for p in self.plds)
        hi = max(p.grid.last for p in self.plds)
        return np.linspace(lo, hi, n)

    def report(self) -> dict:
        out = {
            "mu": self.bound.mu,
            "regret": self.regret,
            "residual_delta_inf": self.bound.residual_delta_inf,
            "epsilon_at_delta": self.epsilon_at_delta,
            "delta_at_epsilon": self.delta_at_epsilon,
            "breakpoint_count": self.breakpoint_count,
            "config_echo": self.config.to_dict(),
        }
        return out


def _mechanism_plds(spec: MechanismSpec, count: int, step: float, total_steps: int):
    """Directional single-step PLDs for one mechanism group."""
    if spec.kind == "randomized_response":
        return [randomized_response_pld(spec.eps, step)]
    out = []
    for profile in directional_profiles(spec):
        grid = choose_grid(profile, step, compositions=total_steps, tail_tol=SINGLE_STEP_TAIL)
        out.append(discretize_ctd(profile, grid))
    return out


def build_plds(config: RunConfig) -> list[DiscretePLD]:
    """Composed PLDs of the whole run, one entry per adjacency track."""
    total = config.total_steps()
    per_group: list[list[DiscretePLD]] = []
    for spec, count in config.mechanisms:
        singles = _mechanism_plds(spec, count, config.grid_step, total)
        per_group.append([compose_mod.self_compose(p, count) for p in singles])
    n_tracks = max(len(g) for g in per_group)
    tracks: list[DiscretePLD] = []
    for track_idx in range(n_tracks):
        parts = [g[track_idx] if len(g) > track_idx else g[0] for g in per_group]
        tracks.append(reduce(compose_mod.compose, parts))
    return tracks


def run_account(config: RunConfig) -> AccountResult:
    plds = build_plds(config)
    curve_list = [curves_mod.tradeoff_from_pld(p) for p in plds]
    bounds = [gdpfit.fit_mu(c) for c in curve_list]
    mu = max(b.mu for b in bounds)
    residual = max(b.residual_delta_inf for b in bounds)
    gdp_pl = gdpfit.gdp_curve(mu)
    reg = max(regret_mod.regret_tradeoff(c, gdp_pl) for c in curve_list)
    result = AccountResult(
        config=config,
        plds=plds,
        curves=curve_list,
        bound=gdpfit.GdpBound(mu=mu, regret=reg, residual_delta_inf=residual),
        regret=reg,
    )
    if config.delta_query is not None:
        eps = curves_mod.epsilon_for_delta(plds, config.delta_query)
        result.epsilon_at_delta = eps
        result.delta_at_epsilon = float(result.exact_delta(eps).max())
    return result


# ---------------------------------------------------------------------------
# representation comparison (the regret table)
# ---------------------------------------------------------------------------


def _pure_budget(spec: MechanismSpec) -> float:
    if spec.kind == "laplace":
        return 1.0 / spec.b
    if spec.kind == "randomized_response":
        return float(spec.eps)
    if spec.kind == "adp_point" and spec.delta == 0.0:
        return float(spec.eps)
    return math.inf


def _rdp_curve(spec: MechanismSpec, t_grid: np.ndarray) -> renyi.RdpCurve:
    if spec.kind == "gaussian":
        base = renyi.gaussian_rdp(spec.sigma)
    elif spec.kind == "subsampled_gaussian":
        base = renyi.subsampled_gaussian_rdp_curve(spec.sigma, spec.q, t_grid)
    elif spec.kind == "laplace":
        base = renyi.laplace_rdp_curve(spec.b)
    elif spec.kind == "randomized_response":
        e0 = float(spec.eps)

        def rr_eval(t):
            t_arr = np.asarray(t, dtype=float)
            p = 1.0 / (1.0 + math.exp(-e0))
            a1 = t_arr * math.log(p) + (1.0 - t_arr) * math.log1p(-p)
            a2 = t_arr * math.log1p(-p) + (1.0 - t_arr) * math.log(p)
            return np.logaddexp(a1, a2) / (t_arr - 1.0)

        base = renyi.RdpCurve(rr_eval, name=f"rr({e0:g})")
    else:
        raise InvalidParamError(
            f"no Renyi curve available for mechanism kind {spec.kind!r}"
        )
    return dataclasses.replace(base, t_grid=t_grid)


def composed_rdp_curve(config: RunConfig) -> renyi.RdpCurve:
    subsampled = any(
        spec.kind == "subsampled_gaussian" for spec, _ in config.mechanisms
    )
    t_grid = renyi.integer_t_grid() if subsampled else renyi.default_t_grid()
    parts = [(_rdp_curve(spec, t_grid), count) for spec, count in config.mechanisms]
    return renyi.compose_rdp(parts)


def compare_representations(
    result: AccountResult,
    representations: tuple[str, ...],
    delta_fixed: float,
    tol: float = regret_mod.DEFAULT_TOL,
) -> dict[str, float]:
    """Regret of each concise representation against the exact curve."""
    for rep in representations:
        if rep not in REPRESENTATIONS:
            raise InvalidParamError(f"unknown representation {rep!r}")
    out: dict[str, float] = {}
    curve_list = result.curves

    def curve_regret(rep_curve) -> float:
        return max(regret_mod.regret_tradeoff(c, rep_curve, tol) for c in curve_list)

    rdp_curve = None
    if "rdp" in representations or "zcdp" in representations:
        rdp_curve = composed_rdp_curve(result.config)
        grid = result.eps_grid()
        exact = result.exact_delta(grid)

    for rep in representations:
        if rep == "profile":
            out[rep] = 0.0
        elif rep == "gdp":
            out[rep] = result.regret
        elif rep == "pure":
            budget = sum(
                _pure_budget(spec) * count for spec, count in result.config.mechanisms
            )
            if not math.isfinite(budget):
                raise InvalidParamError(
                    "a mechanism in this run has no finite pure-DP budget"
                )
            from .mechanisms import adp_tradeoff

            out[rep] = curve_regret(adp_tradeoff(budget, 0.0))
        elif rep == "adp":
            eps_star = curves_mod.epsilon_for_delta(result.plds, delta_fixed)
            from .mechanisms import adp_tradeoff

            out[rep] = curve_regret(adp_tradeoff(max(eps_star, 0.0), delta_fixed))
        elif rep == "rdp":
            profile = renyi.rdp_to_profile(rdp_curve)
            out[rep] = regret_mod.regret_profile(exact, profile.evaluate(grid), grid)
        elif rep == "zcdp":
            rho = renyi.fit_zcdp(rdp_curve)
            profile = renyi.rdp_to_profile(renyi.zcdp_curve(rho))
            out[rep] = regret_mod.regret_profile(exact, profile.evaluate(grid), grid)
    return out
