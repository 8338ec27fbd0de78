"""Command-line interface.

Subcommands: ``account``, ``convert``, ``tradeoff``, ``compare``, ``sweep``.
Flags mirror the usual DP-SGD symbols (--sigma, --sample-rate, --steps,
--delta) and override the corresponding config-file fields.  Data goes to
stdout only when no output path is given; diagnostics go to stderr.  Exit
codes: 0 ok, 2 invalid parameters, 3 no finite GDP parameter exists,
4 unwritable output path.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import curves as curves_mod
from . import gdpfit
from .accountant import (
    DEFAULT_GRID_STEP,
    REPRESENTATIONS,
    RunConfig,
    compare_representations,
    run_account,
)
from .errors import (
    EXIT_INVALID_PARAM,
    EXIT_NO_FINITE_MU,
    EXIT_UNWRITABLE,
    AccountingError,
    InvalidParamError,
    NoFiniteMuError,
)
from .mechanisms import MechanismSpec

ENV_GRID_STEP = "DPGDP_GRID_STEP"

CONVERT_TABLE_EPS = (0.1, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0)
CONVERT_TABLE_DELTA = (1e-5, 1e-6, 1e-9)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _default_grid_step() -> float:
    env = os.environ.get(ENV_GRID_STEP)
    if env:
        try:
            return float(env)
        except ValueError as exc:
            raise InvalidParamError(f"bad {ENV_GRID_STEP}={env!r}") from exc
    return DEFAULT_GRID_STEP


def _read_payload(args) -> dict:
    """Parse the config file once; stdin-backed paths are not re-readable."""
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            return json.load(fh)
    return {}


def _load_config(args, payload: dict | None = None) -> RunConfig:
    payload = dict(payload) if payload is not None else _read_payload(args)
    if getattr(args, "sigma", None) is not None:
        mech = {
            "kind": "subsampled_gaussian",
            "sigma": args.sigma,
            "q": args.sample_rate if args.sample_rate is not None else 1.0,
            "count": args.steps if args.steps is not None else 1,
        }
        payload["mechanisms"] = [mech]
    if getattr(args, "delta", None) is not None:
        payload["delta_query"] = args.delta
    if getattr(args, "grid_step", None) is not None:
        payload["grid_step"] = args.grid_step
    payload.setdefault("grid_step", _default_grid_step())
    return RunConfig.from_dict(payload)


def _write_or_print(text: str, path: str | None) -> None:
    if path:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"cannot write {path}: {exc}", file=sys.stderr)
            raise SystemExit(EXIT_UNWRITABLE)
    else:
        sys.stdout.write(text)


def cmd_account(args) -> int:
    payload = _read_payload(args)
    config = _load_config(args, payload)
    started = time.perf_counter()
    result = run_account(config)
    report = result.report()
    report["runtime_ms"] = round((time.perf_counter() - started) * 1e3, 3)
    ordered = {
        key: report[key]
        for key in (
            "mu",
            "regret",
            "residual_delta_inf",
            "epsilon_at_delta",
            "delta_at_epsilon",
            "breakpoint_count",
            "runtime_ms",
            "config_echo",
        )
    }
    _write_or_print(
        json.dumps(ordered, indent=2) + "\n",
        args.output or payload.get("output"),
    )
    return 0


def cmd_convert(args) -> int:
    if args.table:
        lines = ["eps" + "".join(f",delta={d:g}" for d in CONVERT_TABLE_DELTA)]
        for eps in CONVERT_TABLE_EPS:
            cells = [
                f"{gdpfit.calibrate_mu_to_adp(eps, d):.2f}" for d in CONVERT_TABLE_DELTA
            ]
            lines.append(f"{eps:g}," + ",".join(cells))
        _write_or_print("\n".join(lines) + "\n", args.output)
        return 0
    if args.eps is None or args.delta is None:
        raise InvalidParamError("convert needs EPS and DELTA (or --table)")
    mu = gdpfit.calibrate_mu_to_adp(args.eps, args.delta)
    _write_or_print(f"mu = {mu:.2f} ({_fmt(mu)})\n", args.output)
    return 0


def cmd_tradeoff(args) -> int:
    config = _load_config(args)
    result = run_account(config)
    mu = result.bound.mu
    alphas = np.concatenate(
        [c.alpha for c in result.curves] + [np.linspace(0.0, 1.0, 1000)]
    )
    alphas = np.unique(np.clip(alphas, 0.0, 1.0))[::-1]  # descending
    beta = np.min(
        np.vstack([curves_mod.eval_tradeoff(c, alphas) for c in result.curves]), axis=0
    )
    beta_gdp = gdpfit.gdp_tradeoff(mu, alphas)
    lines = ["alpha,beta,beta_gdp"]
    lines.extend(
        f"{_fmt(a)},{_fmt(b)},{_fmt(g)}" for a, b, g in zip(alphas, beta, beta_gdp)
    )
    _write_or_print("\n".join(lines) + "\n", args.csv)
    return 0


def cmd_compare(args) -> int:
    config = _load_config(args)
    reps = tuple(r.strip() for r in args.representations.split(",") if r.strip())
    for rep in reps:
        if rep not in REPRESENTATIONS:
            raise InvalidParamError(f"unknown representation {rep!r}")
    result = run_account(config)
    table = compare_representations(result, reps, args.delta_fixed)
    width = max(len("representation"), max(len(r) for r in table))
    lines = [f"{'representation':<{width + 2}}regret_pct"]
    for rep in reps:
        lines.append(f"{rep:<{width + 2}}{100.0 * table[rep]:.2f}")
    _write_or_print("\n".join(lines) + "\n", args.output)
    return 0


def _parse_float_list(text: str, name: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InvalidParamError(f"bad {name} list {text!r}") from exc
    if not values:
        raise InvalidParamError(f"{name} list is empty")
    return values


def cmd_sweep(args) -> int:
    sigmas = _parse_float_list(args.sigma, "--sigma")
    qs = _parse_float_list(args.sample_rate, "--sample-rate")
    ts = [int(t) for t in _parse_float_list(args.steps, "--steps")]
    step = args.grid_step if args.grid_step is not None else _default_grid_step()
    rows = []
    ok = True
    for sigma in sigmas:
        for q in qs:
            for t in ts:
                config = RunConfig(
                    mechanisms=(
                        (
                            MechanismSpec(
                                kind="subsampled_gaussian", sigma=sigma, q=q
                            ),
                            t,
                        ),
                    ),
                    grid_step=step,
                )
                result = run_account(config)
                rows.append((sigma, q, t, result.bound.mu, result.regret))
                if sigma >= 2.0 and t >= 400 and result.regret >= args.threshold:
                    ok = False
    lines = ["sigma,q,t,mu,regret"]
    lines.extend(
        f"{_fmt(s)},{_fmt(q)},{t},{_fmt(mu)},{_fmt(reg)}"
        for s, q, t, mu, reg in rows
    )
    _write_or_print("\n".join(lines) + "\n", args.csv)
    verdict = "PASS" if ok else "FAIL"
    print(
        f"rule-of-thumb (sigma >= 2, steps >= 400, regret < {args.threshold:g}): "
        f"{verdict}",
        file=sys.stdout if args.csv else sys.stderr,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpgdp",
        description="Numerically exact DP accounting with tight Gaussian-DP fits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p, with_output=True):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--sigma", type=float, help="noise multiplier")
        p.add_argument("--sample-rate", type=float, help="Poisson sampling rate q")
        p.add_argument("--steps", type=int, help="number of compositions")
        p.add_argument("--delta", type=float, help="delta for the epsilon query")
        p.add_argument("--grid-step", type=float, help="loss grid step (nats)")
        if with_output:
            p.add_argument("--output", help="write result here instead of stdout")

    p_account = sub.add_parser("account", help="fit mu and regret for a run")
    add_run_flags(p_account)
    p_account.set_defaults(func=cmd_account)

    p_convert = sub.add_parser("convert", help="(eps, delta) -> mu calibration")
    p_convert.add_argument("eps", nargs="?", type=float)
    p_convert.add_argument("delta", nargs="?", type=float)
    p_convert.add_argument("--table", action="store_true", help="full grid")
    p_convert.add_argument("--output")
    p_convert.set_defaults(func=cmd_convert)

    p_tradeoff = sub.add_parser("tradeoff", help="export the trade-off curve")
    add_run_flags(p_tradeoff, with_output=False)
    p_tradeoff.add_argument("--csv", help="CSV output path (stdout if omitted)")
    p_tradeoff.set_defaults(func=cmd_tradeoff)

    p_compare = sub.add_parser("compare", help="regret table across representations")
    add_run_flags(p_compare)
    p_compare.add_argument(
        "--representations",
        default="pure,adp,zcdp,gdp,rdp,profile",
        help="comma list from: " + ",".join(REPRESENTATIONS),
    )
    p_compare.add_argument("--delta-fixed", type=float, default=1e-5)
    p_compare.set_defaults(func=cmd_compare)

    p_sweep = sub.add_parser("sweep", help="(sigma, q, T) grid of fits")
    p_sweep.add_argument("--sigma", required=True, help="comma list")
    p_sweep.add_argument("--sample-rate", required=True, help="comma list")
    p_sweep.add_argument("--steps", required=True, help="comma list")
    p_sweep.add_argument("--threshold", type=float, default=0.01)
    p_sweep.add_argument("--grid-step", type=float)
    p_sweep.add_argument("--csv", help="CSV output path (stdout if omitted)")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NoFiniteMuError as exc:
        print(
            f"error: {exc} (residual_delta_inf={exc.residual_delta_inf:.6g})",
            file=sys.stderr,
        )
        return EXIT_NO_FINITE_MU
    except InvalidParamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_PARAM
    except AccountingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
