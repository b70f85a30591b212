#!/usr/bin/env python3
"""
Command-line front end for uplink NOMA BER bounds and simulations.

    python cli.py bound --preset scenario-2 --ebn0 0:40:4
    python cli.py simulate --preset scenario-1 --detector sicd --out sim.csv
    python cli.py compare --config my.env --format json
    python cli.py presets
    python cli.py dump-config --preset scenario-3 > scenario3.env
"""

import argparse
import asyncio
import logging
import sys
from pathlib import Path

from dotenv import load_dotenv

from loop import sampling_loop
from noma import (
    BerCurve,
    ConfigurationError,
    DetectorKind,
    NomaError,
    ResourceError,
    UsageError,
    bound_curve,
    gamma_spectrum,
)
from noma.config import (
    PRESETS,
    Mode,
    RunConfig,
    dump_config,
    load_preset_spec,
    log_level,
    parse_config,
    term_budget,
)
from noma.curve import render_curve, write_text_atomic
from noma.detection import SicOrdering

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_RESOURCE = 3


def _scenario_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    source = parent.add_mutually_exclusive_group()
    source.add_argument("--preset", choices=list(PRESETS), help="built-in scenario")
    source.add_argument("--config", help="key-value scenario/run config file")
    parent.add_argument("--out", help="output path (default: stdout)")
    parent.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    return parent


def _run_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--ebn0",
        help="Eb/N0 grid start:stop:step in dB (default 0:40:4); write --ebn0=-5:10:5 for a negative start",
    )
    parent.add_argument("--format", choices=("csv", "json"), dest="fmt")
    parent.add_argument("--detector", choices=[d.value for d in DetectorKind])
    parent.add_argument("--sicd-ordering", choices=[o.value for o in SicOrdering])
    parent.add_argument("--seed", type=int)
    parent.add_argument("--min-errors", type=int)
    parent.add_argument("--max-symbols", type=int)
    parent.add_argument("--block-len", type=int)
    parent.add_argument("--workers", type=int, help="worker processes (default NOMA_WORKERS or CPU count)")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cli.py", description="Uplink NOMA JMLD BER bounds and Monte Carlo simulation."
    )
    commands = parser.add_subparsers(dest="command", required=True)
    scenario, run = _scenario_options(), _run_options()

    bound = commands.add_parser("bound", parents=[scenario, run], help="analytical union bound")
    bound.add_argument("--spectrum-out", help="write the Gamma spectrum of every user to this file")
    commands.add_parser("simulate", parents=[scenario, run], help="Monte Carlo BER")
    commands.add_parser("compare", parents=[scenario, run], help="bound and simulation on one grid")
    commands.add_parser("presets", help="list built-in scenarios")
    commands.add_parser("dump-config", parents=[scenario], help="print a scenario as a config file")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config from --preset or --config, with command-line flags taking precedence."""
    if args.config:
        _, config = parse_config(args.config)
    else:
        preset = args.preset or ("scenario-2" if args.command == "dump-config" else None)
        if preset is None:
            raise UsageError("one of --preset or --config is required")
        config = RunConfig(scenario=load_preset_spec(preset), preset=preset)

    overrides = {
        "ebn0": getattr(args, "ebn0", None),
        "fmt": getattr(args, "fmt", None),
        "detector": getattr(args, "detector", None),
        "sicd_ordering": getattr(args, "sicd_ordering", None),
        "seed": getattr(args, "seed", None),
        "min_errors": getattr(args, "min_errors", None),
        "max_symbols": getattr(args, "max_symbols", None),
        "block_len": getattr(args, "block_len", None),
        "out": args.out,
    }
    overrides = {key: value for key, value in overrides.items() if value is not None}
    if args.command in tuple(Mode):
        overrides["mode"] = Mode(args.command)
    return config.replace(**overrides)


def compute_bound(config: RunConfig) -> tuple[BerCurve, list]:
    scenario = config.scenario.build()
    budget = term_budget()
    spectra = [gamma_spectrum(n, scenario, budget=budget) for n in range(scenario.n_users)]
    for spectrum in spectra:
        print(
            f"user {spectrum.target + 1}: {len(spectrum)} bound terms after Gamma deduplication "
            f"({spectrum.total_multiplicity} raw)",
            file=sys.stderr,
        )
    return bound_curve(scenario, config.grid, budget=budget), spectra


def compute_simulation(config: RunConfig, workers: int | None) -> BerCurve:
    plan = config.plan()

    def report(kind, points):
        for point in points:
            logger.info(
                "%s %.2f dB user %d: ber=%.3e (%d/%d)",
                kind.value,
                point.ebn0_db,
                point.user,
                point.ber,
                point.bit_errors,
                point.bits_sent,
            )

    curves = asyncio.run(sampling_loop(plan=plan, point_callback=report, workers=workers))
    return curves[plan.detector]


def execute(args: argparse.Namespace) -> int:
    if args.command == "presets":
        for name, spec in PRESETS.items():
            print(
                f"{name}: N={len(spec.orders)} L={spec.antennas} "
                f"M={','.join(map(str, spec.orders))} gains_db={','.join(f'{g:g}' for g in spec.gains_db)}"
            )
        return EXIT_OK

    config = resolve_config(args)
    if args.command == "dump-config":
        text = dump_config(config)
        if args.out:
            write_text_atomic(args.out, text)
        else:
            sys.stdout.write(text)
        return EXIT_OK

    if args.workers is not None and args.workers < 1:
        raise ConfigurationError(f"--workers must be at least 1, got {args.workers}")

    spectra = []
    if config.mode == Mode.BOUND:
        curve, spectra = compute_bound(config)
    elif config.mode == Mode.SIMULATE:
        curve = compute_simulation(config, args.workers)
    else:
        bound, _ = compute_bound(config)
        curve = compute_simulation(config, args.workers).merge(bound)

    text = render_curve(curve, config.fmt)
    spectrum_out = getattr(args, "spectrum_out", None)
    if spectrum_out:
        write_text_atomic(
            spectrum_out,
            "".join(f"# user {s.target + 1}\n{s.to_text()}" for s in spectra),
        )
    if config.out:
        try:
            write_text_atomic(config.out, text)
        except OSError:
            # all outputs or none
            if spectrum_out:
                Path(spectrum_out).unlink(missing_ok=True)
            raise
    else:
        sys.stdout.write(text)
    if any(p.ber > 1 for p in curve.points):
        print("note: some bound values exceed 1 (union bound at low Eb/N0)", file=sys.stderr)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    verbose = getattr(args, "verbose", 0)
    level = logging.DEBUG if verbose > 1 else logging.INFO if verbose else log_level()
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return execute(args)
    except ResourceError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return EXIT_RESOURCE
    except NomaError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
