"""Command-line runner: `omtopo scenario|sweep|steady|transfer|list`.

Exit codes: 0 success, 1 solver failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .meanfield import (CalibrationError, DivergenceError, SteadyStateError,
                        find_steady_state_fixed_point, find_steady_state_ode)
from .model import SpecError
from .dynamics import transfer_fidelity, transfer_to_csv, cosine_chain_schedule
from .scenarios import (SCENARIOS, ConfigError, apply_overrides, default_out_root,
                        load_config, run_scenario, run_sweep, scenario)

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CONFIG = 2


def _parse_set(items):
    overrides = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got '{item}'")
        key, _, val = item.partition("=")
        try:
            overrides[key.strip()] = float(val)
        except ValueError:
            raise ConfigError(f"--set value for '{key}' must be numeric, got '{val}'") from None
    return overrides


def _cmd_scenario(args):
    overrides = _parse_set(args.set)
    manifest = run_scenario(args.name, overrides=overrides, out_dir=args.out)
    print(json.dumps({"scenario": manifest["scenario"],
                      "outputs": manifest["outputs"],
                      "extras": manifest["extras"]}, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_sweep(args):
    kind, payload = load_config(args.config)
    if kind != "sweep":
        raise ConfigError(f"'{args.config}' is a {kind} config; `sweep` needs type=sweep")
    out_dir = args.out or payload.get("out_dir")
    manifest = run_sweep(payload["sweep"], base_spec=payload.get("spec"), out_dir=out_dir)
    print(json.dumps({"outputs": manifest["outputs"], "errors": manifest["errors"]},
                     indent=2, sort_keys=True))
    return EXIT_OK if not manifest["errors"] else EXIT_SOLVER


def _cmd_steady(args):
    kind, payload = load_config(args.config)
    if kind != "scenario":
        raise ConfigError(f"'{args.config}' is a {kind} config; `steady` needs type=scenario")
    if payload.get("name"):
        sc = scenario(payload["name"])
        spec, settings = apply_overrides(sc.spec, sc.settings, payload.get("overrides", {}))
    else:
        spec = payload["spec"]
        sc = scenario("fig2a")
        spec, settings = apply_overrides(spec, sc.settings, payload.get("overrides", {}))
    if args.method == "ode":
        report = find_steady_state_ode(spec, tol=settings.tol_ode, dt=settings.dt or None,
                                       max_time=settings.max_time)
    else:
        report = find_steady_state_fixed_point(spec, tol=settings.tol_fp,
                                               damping=settings.damping)
    print(json.dumps({
        "method": report.method.value,
        "residual": report.residual,
        "iterations_or_time": report.iterations_or_time,
        "alpha_re": [x.real for x in report.state.alpha],
        "alpha_im": [x.imag for x in report.state.alpha],
        "beta_re": [x.real for x in report.state.beta],
        "beta_im": [x.imag for x in report.state.beta],
    }, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_transfer(args):
    if args.ideal:
        result = transfer_fidelity(cosine_chain_schedule(args.nu), args.nu, dt=args.dt)
    else:
        spec = scenario("transfer").spec
        drives = tuple(type(d)(kind=d.kind, base=d.base, sign=d.sign, nu=args.nu, phase=d.phase)
                       for d in spec.drive)
        from dataclasses import replace
        spec = replace(spec, drive=drives)
        result = transfer_fidelity(spec, args.nu, dt=args.dt)
    out_dir = args.out or os.path.join(default_out_root(), "transfer")
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "transfer.csv")
    transfer_to_csv(result, path)
    print(json.dumps({"fidelity": result.fidelity, "norm_drift": result.norm_drift,
                      "csv": path}, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_list(_args):
    for name in SCENARIOS:
        sc = SCENARIOS[name]
        print(f"{name:10s} {sc.description}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="omtopo",
                                     description="Optomechanical-lattice scenario runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scenario", help="run a named figure scenario")
    p.add_argument("name")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a spec field (kappa[1]=5) or solver setting (solver.tol_ode=1e-8)")
    p.add_argument("--out", help=f"output directory (default {default_out_root()}/<name>)")
    p.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("sweep", help="run a parameter sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("steady", help="solve one steady state from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--method", choices=("ode", "fixed_point"), default="fixed_point")
    p.set_defaults(func=_cmd_steady)

    p = sub.add_parser("transfer", help="propagate the zero-mode state transfer")
    p.add_argument("--nu", type=float, default=0.006)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--ideal", action="store_true",
                   help="use the ideal cosine coupling law instead of the solved response")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_transfer)

    p = sub.add_parser("list", help="print the scenario catalog")
    p.set_defaults(func=_cmd_list)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SpecError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SteadyStateError, DivergenceError, CalibrationError, RuntimeError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
