"""Accumulating accountant handle with the training-loop ergonomics:

    import gdpnum

    accountant = gdpnum.CTDAccountant()
    for mini_batch in data_loader:
        ...
        accountant.step(noise_multiplier=1.0, sample_rate=0.001)

    mu, regret = accountant.get_mu_and_regret()

The handle holds no numerics: every query marshals the accumulated steps
into a run configuration and invokes the ``dpgdp`` command-line accountant
(which must be installed in the same Python environment), so wrapper
results are bit-identical to the CLI's JSON report.
"""

from .accountant import (
    AccountantError,
    CTDAccountant,
    EmptyAccountantError,
    InvalidStepError,
    NoFiniteMuError,
)

__version__ = "0.1.0"

__all__ = [
    "AccountantError",
    "CTDAccountant",
    "EmptyAccountantError",
    "InvalidStepError",
    "NoFiniteMuError",
]
