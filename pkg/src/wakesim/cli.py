"""Command-line interface: one subcommand per scenario.

Exit codes: 0 on success, 2 on configuration problems, 1 on other failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import SCENARIOS, load_config
from .errors import CalibrationError, ConfigurationError
from .scenarios import run_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wakesim",
        description="Link-level simulator for frame-length wake-up signaling")
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", type=Path, default=None,
                       help="INI config file (defaults are used when omitted)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the RNG seed")
        p.add_argument("--trials", type=int, default=None,
                       help="override the trial count (meaning depends on scenario)")
        p.add_argument("--out", type=Path, default=None,
                       help="override the output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, scenario=args.scenario,
                          rng_seed=args.seed, n_trials=args.trials,
                          output_dir=args.out)
        result = run_scenario(cfg)
    except ConfigurationError as exc:
        print(f"wakesim: configuration error: {exc}", file=sys.stderr)
        return 2
    except (CalibrationError, OSError) as exc:
        print(f"wakesim: error: {exc}", file=sys.stderr)
        return 1
    print(result.summary)
    for path in result.csv_paths:
        print(f"wrote {path}")
    print(f"wrote {result.summary_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
