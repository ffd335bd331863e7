"""Command-line front end.

    dpkalman <calibrate|bounds|simulate|dare|compose> --config <path>
             [--kind apriori|aposteriori] [--out CSV] [--summary JSON]
             [--json] [--threads N] [--seed N]

Exit codes: 0 success, 1 validation error, 2 infeasible calibration,
3 numerical failure. With ``--json`` stdout carries exactly one JSON
document; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .bounds import all_bounds
from .calibration import (
    APRIORI,
    CalibrationTarget,
    calibrate_aposteriori,
    calibrate_apriori,
)
from .config import Config, build_agents, build_privacy, load_config, resolve_sigma
from .errors import (
    ConfigError,
    DPKalmanError,
    EXIT_INFEASIBLE,
    EXIT_OK,
    EXIT_VALIDATION,
    NotDiagonalError,
)
from .filtering import solve_filter
from .linalg import solve_dare
from .network import compose, per_agent_slices
from .simulation import SimulationConfig, simulate, write_csv


class _Parser(argparse.ArgumentParser):
    # Usage problems are validation errors (exit 1), not argparse's default 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dpkalman", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, func):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--json", action="store_true", help="emit a single JSON document on stdout")
        p.set_defaults(func=func)
        return p

    p = add("calibrate", "select an epsilon interval for a target MSE range", _cmd_calibrate)
    p.add_argument("--kind", choices=["apriori", "aposteriori"], help="override the configured target kind")

    add("bounds", "evaluate all four error/entropy bound reports", _cmd_bounds)

    p = add("simulate", "run the seeded Monte Carlo experiment", _cmd_simulate)
    p.add_argument("--out", help="write per-step CSV here")
    p.add_argument("--summary", help="write the summary JSON here")
    p.add_argument("--threads", type=int, default=0, help="worker threads (default: all cores)")
    p.add_argument("--seed", type=int, help="override the configured seed")

    add("dare", "solve the steady-state Riccati equation and summarize", _cmd_dare)
    add("compose", "compose a multi-agent network and report per-agent traces", _cmd_compose)
    return parser


def _fmt(value) -> str:
    if isinstance(value, bool) or not isinstance(value, float):
        return str(value)
    return format(value, ".6g")


def _print_human(doc: dict, indent: int = 0) -> None:
    pad = "  " * indent
    for key, value in doc.items():
        if isinstance(value, dict):
            print(f"{pad}{key}:")
            _print_human(value, indent + 1)
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            print(f"{pad}{key}:")
            for item in value:
                _print_human(item, indent + 1)
                print()
        elif isinstance(value, list):
            print(f"{pad}{key}: [{', '.join(_fmt(v) for v in value)}]")
        else:
            print(f"{pad}{key}: {_fmt(value)}")


def _emit(doc: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(doc, indent=2))
    else:
        _print_human(doc)


def _need(section, name: str):
    if section is None:
        raise ConfigError(f"this command requires a '{name}' section in the config")
    return section


def _system_of(config: Config):
    return _need(config.system, "system")


def _cmd_calibrate(args) -> int:
    config = load_config(args.config)
    system = _system_of(config)
    privacy = _need(config.privacy, "privacy")
    cal = _need(config.calibration, "calibration")
    kind = args.kind or cal.kind
    target = CalibrationTarget(
        kind=kind, B_l=cal.B_l, B_u=cal.B_u,
        delta=privacy.delta, adjacency_B=privacy.adjacency_B,
    )
    if kind == APRIORI:
        interval = calibrate_apriori(system, target)
    else:
        interval = calibrate_aposteriori(system, target)
    doc = {"kind": kind, "B_l": cal.B_l, "B_u": cal.B_u, **interval.to_dict()}
    _emit(doc, args.json)
    if not interval.feasible:
        print("calibration target is infeasible under the sufficient conditions", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_bounds(args) -> int:
    config = load_config(args.config)
    system = _system_of(config)
    privacy = _need(config.privacy, "privacy")
    sigma = resolve_sigma(system, privacy)
    reports = all_bounds(system, sigma)
    doc = {kind: rep.to_dict() for kind, rep in reports.items()}
    doc["sigma"] = [float(s) for s in sigma]
    _emit(doc, args.json)
    return EXIT_OK


def _riccati_summary(ric) -> dict:
    _, logdet_prior = np.linalg.slogdet(ric.sigma)
    _, logdet_post = np.linalg.slogdet(ric.sigma_bar)
    return {
        "trace_prior": float(np.trace(ric.sigma)),
        "trace_posterior": float(np.trace(ric.sigma_bar)),
        "logdet_prior": float(logdet_prior),
        "logdet_posterior": float(logdet_post),
        "iterations": int(ric.iterations),
        "residual": float(ric.residual),
    }


def _cmd_dare(args) -> int:
    config = load_config(args.config)
    system = _system_of(config)
    privacy = _need(config.privacy, "privacy")
    sigma = resolve_sigma(system, privacy)
    ric = solve_dare(system, np.diag(sigma**2))
    print(json.dumps(_riccati_summary(ric), indent=2))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    config = load_config(args.config)
    sim = _need(config.simulation, "simulation")
    if config.agents is not None:
        network = compose(build_agents(config.agents))
        sim_config = SimulationConfig(
            system=network, privacy=None,
            horizon_T=sim.horizon_T, trials=sim.trials,
            seed=args.seed if args.seed is not None else sim.seed,
        )
    else:
        system = _system_of(config)
        privacy = build_privacy(system, _need(config.privacy, "privacy"))
        sim_config = SimulationConfig(
            system=system, privacy=privacy,
            horizon_T=sim.horizon_T, trials=sim.trials,
            seed=args.seed if args.seed is not None else sim.seed,
        )
    threads = args.threads if args.threads > 0 else (os.cpu_count() or 1)
    result = simulate(sim_config, threads=threads)
    if args.out:
        write_csv(result, args.out)
        print(f"wrote {result.trials * result.horizon_T} rows to {args.out}", file=sys.stderr)
    def num(x: float):
        return float(x) if math.isfinite(x) else None

    doc = result.summary.to_dict()
    doc["seed"] = int(result.seed)
    doc["bound_prior"] = [num(result.bound_prior[0]), num(result.bound_prior[1])]
    doc["bound_post"] = [num(result.bound_post[0]), num(result.bound_post[1])]
    if args.summary:
        with open(args.summary, "w", encoding="ascii", newline="") as fh:
            fh.write(json.dumps(doc, indent=2) + "\n")
    _emit(doc, args.json)
    return EXIT_OK


def _cmd_compose(args) -> int:
    config = load_config(args.config)
    if config.agents is None:
        raise ConfigError("this command requires an 'agents' section in the config")
    network = compose(build_agents(config.agents))
    sol = solve_filter(network.system, network.sigma)
    slices = per_agent_slices(network, sol)
    doc = {
        "n": network.system.n,
        "q": network.system.q,
        "agents": [
            {
                "id": agent.id,
                "state_offset": [int(a), int(b)],
                "trace_prior": slices[agent.id][0],
                "trace_posterior": slices[agent.id][1],
            }
            for agent, (a, b) in zip(network.agents, network.offsets)
        ],
        "riccati": _riccati_summary(sol.riccati),
    }
    try:
        reports = all_bounds(network.system, network.sigma)
    except NotDiagonalError:
        pass  # network-level bounds need a diagonal composed C
    else:
        doc["bounds"] = {kind: rep.to_dict() for kind, rep in reports.items()}
    _emit(doc, args.json)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DPKalmanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
