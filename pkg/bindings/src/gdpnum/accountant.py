"""The CTDAccountant handle and its CLI marshalling layer."""

from __future__ import annotations

import json
import math
import re
import subprocess
import sys
import tempfile
from pathlib import Path


class AccountantError(Exception):
    """Base error; ``code`` mirrors the CLI exit code."""

    code = 1


class InvalidStepError(AccountantError, ValueError):
    code = 2


class EmptyAccountantError(AccountantError):
    code = 2

    def __init__(self):
        super().__init__("empty accountant: record at least one step first")


class NoFiniteMuError(AccountantError):
    code = 3

    def __init__(self, residual_delta_inf: float, message: str):
        self.residual_delta_inf = residual_delta_inf
        super().__init__(message)


_RESIDUAL_RE = re.compile(r"residual_delta_inf=([0-9.eE+-]+)")


class CTDAccountant:
    """Accumulates subsampled-Gaussian steps; queries run the CLI.

    Steps only append; consecutive steps with identical parameters coalesce
    into a repeat count.  Queries never mutate the handle, and distinct
    handles share no state, so independent handles are safe to use
    concurrently.
    """

    def __init__(self, grid_step: float | None = None):
        self._groups: list[dict] = []
        self._grid_step = grid_step

    # -- recording ---------------------------------------------------------

    def step(self, noise_multiplier: float, sample_rate: float) -> None:
        if not (noise_multiplier > 0 and math.isfinite(noise_multiplier)):
            raise InvalidStepError(
                f"noise_multiplier must be positive, got {noise_multiplier}"
            )
        if not (0.0 < sample_rate <= 1.0):
            raise InvalidStepError(
                f"sample_rate must be in (0, 1], got {sample_rate}"
            )
        if self._groups:
            last = self._groups[-1]
            if (
                last["sigma"] == noise_multiplier
                and last["q"] == sample_rate
            ):
                last["count"] += 1
                return
        self._groups.append(
            {"sigma": float(noise_multiplier), "q": float(sample_rate), "count": 1}
        )

    @property
    def steps(self) -> list[tuple[float, float, int]]:
        """Snapshot of (noise_multiplier, sample_rate, count) groups."""
        return [(g["sigma"], g["q"], g["count"]) for g in self._groups]

    # -- queries -----------------------------------------------------------

    def get_mu_and_regret(self) -> tuple[float, float]:
        report = self._run(delta=None)
        return report["mu"], report["regret"]

    def get_epsilon(self, delta: float) -> float:
        if not (0.0 < delta < 1.0):
            raise InvalidStepError(f"delta must be in (0, 1), got {delta}")
        report = self._run(delta=delta)
        return report["epsilon_at_delta"]

    # -- CLI marshalling ----------------------------------------------------

    def _config(self, delta: float | None) -> dict:
        if not self._groups:
            raise EmptyAccountantError()
        config: dict = {
            "mechanisms": [
                {
                    "kind": "subsampled_gaussian",
                    "sigma": g["sigma"],
                    "q": g["q"],
                    "count": g["count"],
                }
                for g in self._groups
            ]
        }
        if self._grid_step is not None:
            config["grid_step"] = self._grid_step
        if delta is not None:
            config["delta_query"] = delta
        return config

    def _run(self, delta: float | None) -> dict:
        config = self._config(delta)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "run.json"
            path.write_text(json.dumps(config), encoding="utf-8")
            proc = subprocess.run(
                [sys.executable, "-m", "dpgdp", "account", "--config", str(path)],
                capture_output=True,
                text=True,
            )
        return _translate(proc)


def _translate(proc: subprocess.CompletedProcess) -> dict:
    """Map a finished CLI invocation to a report dict or a typed error."""
    if proc.returncode == 0:
        return json.loads(proc.stdout)
    message = proc.stderr.strip() or f"accountant CLI failed ({proc.returncode})"
    if proc.returncode == 3:
        match = _RESIDUAL_RE.search(message)
        residual = float(match.group(1)) if match else float("nan")
        raise NoFiniteMuError(residual, message)
    if proc.returncode == 2:
        raise InvalidStepError(message)
    raise AccountantError(message)
