#!/usr/bin/env python3
"""
Main entry point for the choice estimation toolkit.

This module sets up logging and provides the command-line interface:
``estimate``, ``simulate``, ``validate`` and ``analyze``. Exit codes are 0
on success, 1 for input or configuration errors and 2 when an estimation
did not converge.
"""

import sys
import logging
import logging.config
import argparse
from pathlib import Path
from typing import List, Optional

import yaml

# Add the project root to the Python path
project_root = Path(__file__).resolve().parent.parent.parent
sys.path.insert(0, str(project_root))

from src.core.errors import ChoiceKitError, EstimationError  # noqa: E402
from src.app.commands import COMMANDS, EXIT_INPUT, EXIT_NOT_CONVERGED  # noqa: E402
from src.app.config import load_run_config  # noqa: E402

logger = logging.getLogger(__name__)


def setup_logging() -> bool:
    """Set up logging configuration from the YAML file."""
    logging_config_path = project_root / 'config' / 'logging_config.yaml'

    # Create logs directory if it doesn't exist
    logs_dir = project_root / 'logs'
    logs_dir.mkdir(exist_ok=True)

    try:
        with open(logging_config_path, 'r') as config_file:
            config = yaml.safe_load(config_file)
        for handler in config.get('handlers', {}).values():
            if 'filename' in handler:
                handler['filename'] = str(project_root / handler['filename'])
        logging.config.dictConfig(config)
        return True
    except Exception as e:
        print(f"Error loading logging configuration: {e}", file=sys.stderr)
        return False


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='choicekit',
        description='Estimate, simulate and validate random utility and random regret choice models'
    )
    subparsers = parser.add_subparsers(dest='command', help='Command to run')

    helps = {
        'estimate': 'Estimate RUM and/or RRM models on a dataset',
        'simulate': 'Generate a synthetic design and simulate choices',
        'validate': 'k-fold estimate-then-predict validation with MAPE',
        'analyze': 'WTP, elasticity and RUM/RRM comparison tables from estimation results',
    }
    for name, text in helps.items():
        sub = subparsers.add_parser(name, help=text)
        sub.add_argument('--config', help='YAML run file')
        sub.add_argument('--dataset', help='Choice data CSV (output path for simulate)')
        sub.add_argument('--model-kind', dest='model_kind', help='RUM, RRM or both')
        sub.add_argument('--draws', type=int, help='Simulation draws per decision maker')
        sub.add_argument('--seed', type=int, help='Run seed')
        sub.add_argument('--folds', type=int, help='Number of validation folds')
        sub.add_argument('--output-dir', dest='output_dir', help='Directory for result files')
        sub.add_argument('--n-situations', dest='n_situations', type=int, help='Situations to simulate')
        sub.add_argument('--threads', type=int, help='Cap on concurrent work')
        sub.add_argument('--segment', help="Run per product segment: 'all' or labels such as PD1,PD3")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    # Set up logging
    if not setup_logging():
        print("Using basic logging configuration", file=sys.stderr)
        logging.basicConfig(
            level=logging.INFO,
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )

    if args.command is None:
        parser.print_help()
        return EXIT_INPUT

    overrides = {
        key: getattr(args, key)
        for key in ('dataset', 'model_kind', 'draws', 'seed', 'folds', 'output_dir', 'n_situations', 'threads',
                    'segment')
    }
    overrides['command'] = args.command
    try:
        cfg = load_run_config(args.config, overrides)
        logger.info(f"Running '{args.command}' (config {cfg.config_hash()}, seed {cfg.seed})")
        return COMMANDS[args.command](cfg)
    except EstimationError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (ChoiceKitError, ValueError, FileNotFoundError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == '__main__':
    sys.exit(main())
