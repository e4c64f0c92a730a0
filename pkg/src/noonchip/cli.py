"""Command-line interface.

    noonchip simulate --preset fig2a --out results/
    noonchip fringe --preset fig3b --format json
    noonchip contamination --preset fig4-contamination --out results/
    noonchip coincidence pulses.csv --out results/
    noonchip coincidence --profile --out results/
    noonchip fidelity measured.csv reference.csv

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import coinc, detect
from .evolve import NonUnitaryError
from .scenarios import (
    PRESET_NAMES,
    ConfigError,
    NumericError,
    ScenarioConfig,
    ScenarioOutput,
    preset,
    run_contamination,
    run_fringe,
    run_simulate,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _add_scenario_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="scenario config JSON")
    parser.add_argument(
        "--preset", choices=PRESET_NAMES, help="named benchmark scenario"
    )
    parser.add_argument("--seed", type=int, default=None, metavar="U64")
    parser.add_argument("--out", metavar="DIR", help="directory for output files")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")


def _load_config(args: argparse.Namespace) -> tuple[ScenarioConfig, Path | None]:
    if (args.config is None) == (args.preset is None):
        raise ConfigError("give exactly one of --config or --preset")
    if args.preset is not None:
        config = preset(args.preset)
        base_dir = None
    else:
        config = ScenarioConfig.from_file(args.config)
        base_dir = Path(args.config).resolve().parent
    if args.seed is not None:
        config.seed = args.seed
    return config, base_dir


def _emit(output: ScenarioOutput, out_dir: str | None) -> None:
    for line in output.summary:
        print(line)
    if out_dir is None:
        return
    target = Path(out_dir)
    target.mkdir(parents=True, exist_ok=True)
    for name, body in output.files.items():
        path = target / name
        if isinstance(body, bytes):
            path.write_bytes(body)
        else:
            path.write_text(body)
        print(f"wrote {path}")


def _cmd_simulate(args: argparse.Namespace) -> int:
    config, base_dir = _load_config(args)
    _emit(run_simulate(config, args.format, base_dir), args.out)
    return EXIT_OK


def _cmd_fringe(args: argparse.Namespace) -> int:
    config, base_dir = _load_config(args)
    _emit(run_fringe(config, args.format), args.out)
    return EXIT_OK


def _cmd_contamination(args: argparse.Namespace) -> int:
    config, base_dir = _load_config(args)
    _emit(run_contamination(config, args.format, base_dir), args.out)
    return EXIT_OK


def _coincidence_config(args: argparse.Namespace) -> coinc.CoincidenceConfig:
    settings = {}
    if args.config is not None:
        file = Path(args.config)
        if not file.is_file():
            raise ConfigError(f"config file not found: {file}")
        try:
            settings = json.loads(file.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        if not isinstance(settings, dict):
            raise ConfigError("coincidence config must be a JSON object")
    try:
        return coinc.CoincidenceConfig(**settings)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad coincidence settings: {exc}") from exc


def _cmd_coincidence(args: argparse.Namespace) -> int:
    config = _coincidence_config(args)
    output = ScenarioOutput(summary=[])
    if args.profile:
        delays = [0.25 * config.t_clk * i for i in range(int(4 * config.window_cycles) + 9)]
        rows = ["delay_ns,probability"] + [
            f"{d!r},{coinc.window_profile(d, config)!r}" for d in delays
        ]
        output.files["window_profile.csv"] = "\n".join(rows) + "\n"
        output.summary.append(
            f"window profile: flat up to {config.window_ns - config.t_clk!r} ns, "
            f"zero from {config.window_ns!r} ns"
        )
    else:
        if args.pulses is None:
            raise ConfigError("give a pulse CSV file or --profile")
        pulses = Path(args.pulses)
        if not pulses.is_file():
            raise ConfigError(f"pulse file not found: {pulses}")
        events = coinc.read_pulse_csv(pulses)
        counts = coinc.count_coincidences(
            events,
            config,
            clock_phase=args.clock_phase,
            rng_seed=args.seed,
        )
        rows = sorted((";".join(sorted(k)), n) for k, n in counts.items())
        body = ["channels,count"] + [f"{channels},{n}" for channels, n in rows]
        output.files["coincidences.csv"] = "\n".join(body) + "\n"
        total = sum(counts.values())
        output.summary.append(f"{total} coincidence records from {len(events)} pulses")
        for channels, n in rows:
            output.summary.append(f"  {channels}  {n}")
    _emit(output, args.out)
    return EXIT_OK


def _cmd_fidelity(args: argparse.Namespace) -> int:
    for path in (args.dist_a, args.dist_b):
        if not Path(path).is_file():
            raise ConfigError(f"distribution file not found: {path}")
    p = detect.read_distribution_csv(args.dist_a)
    q = detect.read_distribution_csv(args.dist_b)
    try:
        value = detect.fidelity(p, q)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(repr(value))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noonchip",
        description="Heralded path-entanglement simulator for the four-mode chip",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="evolve, herald, and report distributions")
    _add_scenario_args(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_fringe = sub.add_parser("fringe", help="phase sweep of one detection pattern")
    _add_scenario_args(p_fringe)
    p_fringe.set_defaults(func=_cmd_fringe)

    p_cont = sub.add_parser("contamination", help="higher-order-pair event analysis")
    _add_scenario_args(p_cont)
    p_cont.set_defaults(func=_cmd_contamination)

    p_coinc = sub.add_parser("coincidence", help="count clocked coincidences in a pulse CSV")
    p_coinc.add_argument("pulses", nargs="?", help="pulse stream CSV (channel,t_ns)")
    p_coinc.add_argument("--config", metavar="FILE", help="coincidence settings JSON")
    p_coinc.add_argument("--profile", action="store_true", help="emit the analytic window profile")
    p_coinc.add_argument("--clock-phase", type=float, default=0.0)
    p_coinc.add_argument("--seed", type=int, default=None, metavar="U64")
    p_coinc.add_argument("--out", metavar="DIR")
    p_coinc.set_defaults(func=_cmd_coincidence)

    p_fid = sub.add_parser("fidelity", help="compare two distribution CSVs")
    p_fid.add_argument("dist_a")
    p_fid.add_argument("dist_b")
    p_fid.set_defaults(func=_cmd_fidelity)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonUnitaryError, NumericError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
