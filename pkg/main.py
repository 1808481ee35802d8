"""Coherence-cost toolkit - Main entry point"""
import argparse
import sys
from typing import List, Optional

from config import Config, ConfigurationError
from coherence.bounds import NormConvention
from coherence.commands import cmd_fig2, cmd_protocol, cmd_sweep, cmd_verify
from coherence.models import BUILTIN_MODELS, builtin_model, load_model
from coherence.suites import SUITES
from utils.error_handler import EXIT_OK, EXIT_VALIDATION, handle_cli_error
from utils.logger import setup_logger

# Setup main logger
logger = None


def _float_list(raw: str) -> List[float]:
    try:
        return [float(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{raw}'")


def _name_list(raw: str) -> List[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


def _add_model_arguments(parser: argparse.ArgumentParser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--model", metavar="PATH", help="JSON model file with d_S, A_S and U_S")
    source.add_argument("--builtin", choices=sorted(BUILTIN_MODELS), help="built-in target model")
    parser.add_argument("--norm", choices=[c.value for c in NormConvention], default="given",
                        help="‖A_S‖ convention for the bounds (default: given)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cc",
        description="Coherence cost of implementing unitary gates under a conservation law",
    )
    parser.add_argument("--seed", type=int, default=Config.SEED,
                        help=f"seed for randomized searches and suites (default: {Config.SEED})")
    parser.add_argument("--log-level", default=Config.LOG_LEVEL, help="log level (default: LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True)

    fig2 = commands.add_parser("fig2", help="region A/B boundaries over δ")
    _add_model_arguments(fig2)
    fig2.add_argument("--delta-min", type=float, default=0.05)
    fig2.add_argument("--delta-max", type=float, default=1.3)
    fig2.add_argument("--steps", type=int, default=100)
    fig2.add_argument("--out", default="fig2.csv", help="CSV output path")
    fig2.add_argument("--svg", default=None, help="optional SVG output path")

    protocol = commands.add_parser("protocol", help="build and measure the Gaussian-pointer protocol")
    _add_model_arguments(protocol)
    width = protocol.add_mutually_exclusive_group(required=True)
    width.add_argument("--zeta", type=float, help="pointer width ζ")
    width.add_argument("--target-F", dest="target_F", type=float, help="pointer QFI 𝓕 = 4ζ²")
    width.add_argument("--target-delta", type=float, help="error the achievability bound should reach")
    protocol.add_argument("--tail", type=float, default=None,
                          help=f"Gaussian tail mass outside the lattice interior (default: {Config.TAIL_BOUND})")
    protocol.add_argument("--out", default="protocol.json", help="JSON report path")

    verify = commands.add_parser("verify", help="run randomized inequality suites")
    verify.add_argument("--suites", type=_name_list, default=list(SUITES),
                        help=f"comma-separated suites (default: {','.join(SUITES)})")
    verify.add_argument("--trials", type=int, default=1000)
    verify.add_argument("--dim-max", type=int, default=4)
    verify.add_argument("--out", default="verify.csv", help="CSV output path")

    sweep = commands.add_parser("sweep", help="measured error across pointer widths")
    _add_model_arguments(sweep)
    sweep.add_argument("--zetas", type=_float_list, default=[4.0, 8.0, 16.0, 32.0, 64.0],
                       help="comma-separated ascending ζ values")
    sweep.add_argument("--tail", type=float, default=None)
    sweep.add_argument("--out", default="sweep.csv", help="CSV output path")
    return parser


def _target(args):
    if args.model:
        return load_model(args.model)
    return builtin_model(args.builtin)


def run(args) -> int:
    """Dispatch one parsed command; returns the exit status."""
    if args.command == "verify":
        _, status = cmd_verify(args.suites, args.trials, args.seed, args.dim_max, args.out)
        return status

    target = _target(args)
    convention = NormConvention(args.norm)
    if args.command == "fig2":
        cmd_fig2(target, args.delta_min, args.delta_max, args.steps, args.out, args.svg, convention)
    elif args.command == "protocol":
        cmd_protocol(target, zeta=args.zeta, target_F=args.target_F, target_delta=args.target_delta,
                     tail=args.tail, out_json=args.out, seed=args.seed, convention=convention)
    elif args.command == "sweep":
        cmd_sweep(target, args.zetas, args.out, seed=args.seed, tail=args.tail, convention=convention)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point"""
    global logger

    args = build_parser().parse_args(argv)

    # Setup loggers for the entry point and the library packages
    logger = setup_logger(__name__, level=args.log_level)
    for name in ("coherence", "utils"):
        setup_logger(name, level=args.log_level)

    logger.info("=" * 60)
    logger.info(f"Coherence-cost toolkit: {args.command}")
    logger.info("=" * 60)

    # Validate configuration
    try:
        Config.validate()
        logger.debug("Configuration:")
        for key, value in Config.get_all().items():
            logger.debug(f"  {key}: {value}")
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        logger.error("Please check your environment variables or .env file")
        return EXIT_VALIDATION

    try:
        status = run(args)
    except Exception as e:
        status = handle_cli_error(e)
        if status is None:
            logger.error(f"Fatal error: {e}", exc_info=True)
            return EXIT_VALIDATION
        logger.error(f"{type(e).__name__}: {e}")
        return status

    logger.info(f"{args.command} complete (exit status {status})")
    return status


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\nInterrupted by user")
        sys.exit(130)
