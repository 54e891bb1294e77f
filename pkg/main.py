#!/usr/bin/env python3
"""
HyperHOM - hyper-entangled photon pairs in a Hong-Ou-Mandel interferometer
Main entry point for the application
"""

import sys
import argparse
import logging
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from cli.cli_interface import EXIT_CONFIG_ERROR, EXIT_RUNTIME_ERROR, HyperHOMCLI
from core.errors import ConfigError
from utils.config import Config, parse_override
from utils.logger import RunAuditLogger, setup_logging

DEFAULT_CONFIG = project_root / "config" / "default.yaml"

SUBCOMMANDS = {
    'scan-delay': "Coincidences against the arm-2 path difference",
    'scan-mirror': "Coincidences against the source mirror displacement",
    'scan-plate': "Coincidences against the momentum phase plate",
    'scan-hyper': "Phase-plate scans of the hyper-entangled state for each theta",
    'falsify': "Blocking tests on the momentum-entangled state",
    'oracle-check': "Cross-check the coincidence model against the dense oracle",
    'pol-correlation': "Polarization analyzer correlation without the beamsplitter",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="HyperHOM - hyper-entangled two-photon HOM interferometry simulator"
    )
    parser.add_argument(
        "--config",
        type=str,
        default=str(DEFAULT_CONFIG),
        help="Experiment configuration file (YAML)"
    )
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default="INFO",
        help="Logging level"
    )
    parser.add_argument(
        "--log-dir",
        type=str,
        default="data/logs",
        help="Directory for log files"
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="Override a config key (dot notation)")
    common.add_argument("--seed", type=int, help="Seed for Monte Carlo counts and random states")
    common.add_argument("--counts", action="store_true", help="Sample Poisson counts (needs --seed)")
    common.add_argument("--mean-pairs", type=float, help="Mean pairs per scan point for counts")
    common.add_argument("--workers", type=int, help="Threads used to evaluate scan points")
    common.add_argument("--output-dir", type=str, help="Directory for CSV/JSON results")

    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, text in SUBCOMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=text, description=text)
    return parser


def collect_overrides(args) -> list:
    overrides = [parse_override(item) for item in args.overrides]
    if args.seed is not None:
        overrides.append(('seed', args.seed))
    if args.counts:
        overrides.append(('counts', True))
    if args.mean_pairs is not None:
        overrides.append(('mean_pairs', args.mean_pairs))
    if args.workers is not None:
        overrides.append(('workers', args.workers))
    return overrides


def main(argv=None) -> int:
    """Main entry point for HyperHOM"""
    args = build_parser().parse_args(argv)

    setup_logging(args.log_level, args.log_dir)
    logger = logging.getLogger(__name__)

    try:
        config = Config(args.config)
        overrides = collect_overrides(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR

    cli = HyperHOMCLI(config, output_dir=args.output_dir, audit=RunAuditLogger(args.log_dir))
    try:
        return cli.run(args.command, overrides)
    except Exception as e:
        logger.error(f"Fatal error: {e}")
        return EXIT_RUNTIME_ERROR


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logging.getLogger(__name__).info("Interrupted by user")
        sys.exit(130)
