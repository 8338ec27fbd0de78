"""Numerically exact differential-privacy accounting with tight,
non-asymptotic Gaussian-DP reporting and representation-regret metrics."""

from .accountant import RunConfig, AccountResult, run_account, compare_representations
from .compose import compose, self_compose
from .curves import (
    delta_at,
    epsilon_for_delta,
    eval_tradeoff,
    tradeoff_from_pld,
    tradeoff_from_profile,
)
from .errors import (
    AccountingError,
    GridMismatchError,
    GridOverflowError,
    InvalidParamError,
    NoFiniteMuError,
    NonBracketedError,
    NonmonotoneProfileError,
    NumericalInstabilityError,
)
from .gdpfit import (
    GdpBound,
    advantage,
    calibrate_mu_to_adp,
    fit_mu,
    gdp_curve,
    gdp_tradeoff,
    mu_to_epsilon,
)
from .mechanisms import (
    MechanismSpec,
    adp_point_profile,
    adp_tradeoff,
    gaussian_profile,
    laplace_profile,
    pure_dp_to_gdp,
    randomized_response_pld,
    subsampled_gaussian_profile,
)
from .pld import (
    DiscretePLD,
    LossGrid,
    PrivacyProfile,
    TradeoffCurve,
    choose_grid,
    discretize_ctd,
    plrv_x_masses,
)
from .regret import regret_profile, regret_symmetrized, regret_tradeoff
from .renyi import (
    RdpCurve,
    compose_rdp,
    fit_zcdp,
    gaussian_rdp,
    laplace_rdp,
    rdp_to_profile,
    subsampled_gaussian_rdp,
)

__version__ = "0.1.0"

__all__ = [
    "AccountResult",
    "AccountingError",
    "DiscretePLD",
    "GdpBound",
    "GridMismatchError",
    "GridOverflowError",
    "InvalidParamError",
    "LossGrid",
    "MechanismSpec",
    "NoFiniteMuError",
    "NonBracketedError",
    "NonmonotoneProfileError",
    "NumericalInstabilityError",
    "PrivacyProfile",
    "RdpCurve",
    "RunConfig",
    "TradeoffCurve",
    "adp_point_profile",
    "adp_tradeoff",
    "advantage",
    "calibrate_mu_to_adp",
    "choose_grid",
    "compare_representations",
    "compose",
    "compose_rdp",
    "delta_at",
    "discretize_ctd",
    "epsilon_for_delta",
    "eval_tradeoff",
    "fit_mu",
    "fit_zcdp",
    "gaussian_profile",
    "gaussian_rdp",
    "gdp_curve",
    "gdp_tradeoff",
    "laplace_profile",
    "laplace_rdp",
    "mu_to_epsilon",
    "plrv_x_masses",
    "pure_dp_to_gdp",
    "randomized_response_pld",
    "rdp_to_profile",
    "regret_profile",
    "regret_symmetrized",
    "regret_tradeoff",
    "run_account",
    "self_compose",
    "subsampled_gaussian_profile",
    "subsampled_gaussian_rdp",
    "tradeoff_from_pld",
    "tradeoff_from_profile",
]
