"""Exception types shared across the library.

Each error carries a machine-readable ``code`` that doubles as the CLI
process exit code, so scripted callers can branch without parsing text.
"""

EXIT_OK = 0
EXIT_INVALID_PARAM = 2
EXIT_NO_FINITE_MU = 3
EXIT_UNWRITABLE = 4


class AccountingError(Exception):
    """Base class for all library errors."""

    code = 1


class InvalidParamError(AccountingError, ValueError):
    """A mechanism or run parameter is outside its valid range."""

    code = EXIT_INVALID_PARAM


class GridMismatchError(AccountingError):
    """Two loss grids cannot be combined (step or alignment differs)."""

    code = EXIT_INVALID_PARAM


class NonmonotoneProfileError(AccountingError):
    """A privacy profile increased with epsilon; the mechanism
    implementation feeding the discretizer is broken."""

    code = EXIT_INVALID_PARAM


class NumericalInstabilityError(AccountingError):
    """Negative probability mass beyond the tolerated noise budget."""

    code = 1


class GridOverflowError(AccountingError):
    """A composition would need more grid points than the configured cap."""

    code = 1


class NoFiniteMuError(AccountingError):
    """The trade-off curve starts below 1 at alpha = 0, so no finite
    Gaussian-DP parameter can bound it.

    ``residual_delta_inf`` is the offending mass at infinite loss.
    """

    code = EXIT_NO_FINITE_MU

    def __init__(self, residual_delta_inf: float, message: str | None = None):
        self.residual_delta_inf = float(residual_delta_inf)
        super().__init__(
            message
            or "no finite GDP parameter exists: trade-off curve has "
            f"f(0) = 1 - {self.residual_delta_inf:.3e} < 1"
        )


class NonBracketedError(AccountingError, ValueError):
    """A scalar search target lies outside the bracketing interval."""

    code = EXIT_INVALID_PARAM
