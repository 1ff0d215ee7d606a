"""Command-line entry point: load a TOML sweep config, apply flag
overrides, run the sweep and write the CSV."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .experiment import ConfigError, ExperimentConfig, emit_csv, run_sweep

DEFAULT_SWEEPS = {"m": (10.0, 20.0, 50.0, 100.0), "sigma": (5.0, 10.0, 20.0, 40.0)}

_SCENARIO_KEYS = {
    "cells",
    "users_per_cell",
    "cell_radius_m",
    "user_distance_m",
    "pathloss_exponent",
    "edge_snr_db",
    "pilot_len",
    "num_paths",
    "antennas",
    "spacing_ratio",
    "aoa_shape",
    "aoa_spread_deg",
    "placement",
    "quad_nodes",
}


def config_from_file(path: str) -> ExperimentConfig:
    """Parse the [scenario]/[sweep]/[run] tables documented in the README."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"cannot parse {path}: {exc}") from exc

    kwargs = {}
    for key, value in data.get("scenario", {}).items():
        if key not in _SCENARIO_KEYS:
            raise ConfigError(f"scenario.{key}", "unknown key")
        kwargs[key] = value
    sweep = data.get("sweep", {})
    if "variable" in sweep:
        kwargs["sweep_variable"] = sweep["variable"]
    if "values" in sweep:
        kwargs["sweep_values"] = tuple(float(v) for v in sweep["values"])
    run = data.get("run", {})
    if "estimators" in run:
        kwargs["estimators"] = tuple(run["estimators"])
    for key in ("trials", "seed", "out"):
        if key in run:
            kwargs[key] = run[key]
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from exc


def apply_overrides(cfg: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["out"] = args.out
    if args.trials is not None:
        updates["trials"] = args.trials
    if args.cells is not None:
        updates["cells"] = args.cells
    if args.estimators is not None:
        updates["estimators"] = tuple(e.strip() for e in args.estimators.split(",") if e.strip())
    if args.sweep is not None:
        updates["sweep_variable"] = args.sweep
        if cfg.sweep_variable != args.sweep:
            updates["sweep_values"] = DEFAULT_SWEEPS[args.sweep]
    return dataclasses.replace(cfg, **updates)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covmimo",
        description="Monte-Carlo sweeps of pilot-contaminated channel estimation",
    )
    parser.add_argument("--config", help="TOML config file (defaults apply when omitted)")
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--out", help="output CSV path override")
    parser.add_argument("--sweep", choices=("m", "sigma"), help="sweep variable override")
    parser.add_argument("--estimators", help="comma-separated subset of LS,CB,CPA,no-int")
    parser.add_argument("--trials", type=int, help="trials per sweep point")
    parser.add_argument("--cells", type=int, help="number of cells (2 or 7)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_file(args.config) if args.config else ExperimentConfig()
        cfg = apply_overrides(cfg, args)
        results = run_sweep(cfg)
        for row in results:
            print(
                f"{cfg.sweep_variable}={row.sweep_value:g} {row.estimator}: "
                f"err={row.err_db:.3f} dB rate={row.rate_bps_hz:.3f} b/s/Hz ({row.trials} trials)"
            )
        if cfg.out:
            emit_csv(results, cfg.out)
            print(f"wrote {cfg.out}")
    except ConfigError as exc:
        print(json.dumps({"error": str(exc), "field": exc.field}), file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
