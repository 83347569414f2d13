#!/usr/bin/env python3
"""
IRS Secrecy-Rate Simulator CLI
Alternating optimization of the BS beamformer and the IRS phase shifts for
an IRS-assisted wiretap channel, with seeded Monte-Carlo experiments.

Usage:
    python main.py run [--config FILE] [--seed N] [--out FILE] [--threads N]
    python main.py trace [--config FILE] [--out FILE]
    python main.py oracle-check [--config FILE]
    python main.py selftest [--config FILE]

Diagnostics go to stderr; results are written to CSV files only.
"""

import sys
import os
import argparse
import logging
from typing import Optional

# Make the `simulator` package importable when run as a script
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from simulator.modules.CsvWriter import write_csv, write_trace_csv
from simulator.modules.ExperimentConfig import ConfigError, ExperimentConfig, load_config
from simulator.modules.ExperimentRunner import oracle_check, run_experiment, trace_experiment
from simulator.modules.InvariantSuite import InvariantSuite

logger = logging.getLogger("simulator")


class SimulatorCLI:
    """Command-line interface for the secrecy-rate simulator"""

    def __init__(self, verbose: bool = False, debug: bool = False):
        self.verbose = verbose
        self.debug = debug
        self.config: Optional[ExperimentConfig] = None

    def _setup_logging(self) -> None:
        if self.debug:
            level = logging.DEBUG
            fmt = '%(levelname)s [%(name)s]: %(message)s'
        elif self.verbose:
            level = logging.INFO
            fmt = '%(levelname)s: %(message)s'
        else:
            level = logging.WARNING
            fmt = '%(message)s'

        logging.basicConfig(level=level, format=fmt, stream=sys.stderr, force=True)

    def load(self, args: argparse.Namespace) -> ExperimentConfig:
        """Config file first, then command-line overrides"""
        self._setup_logging()
        cfg = load_config(args.config)
        self.config = cfg.with_overrides(
            seed=getattr(args, 'seed', None),
            threads=getattr(args, 'threads', None),
            realizations=getattr(args, 'realizations', None),
        )
        logger.info(f"Loaded configuration from: {args.config or 'built-in defaults'}")
        return self.config

    def run(self, args: argparse.Namespace) -> int:
        cfg = self.load(args)
        output = args.out or cfg.output
        rows = run_experiment(cfg)
        write_csv(rows, output)

        failed = sum(row.n_failed for row in rows)
        _report(f"Wrote {len(rows)} result row(s) to {output}")
        if failed:
            _report(f"  {failed} scheme run(s) failed and were excluded from the means")
        return 0

    def trace(self, args: argparse.Namespace) -> int:
        cfg = self.load(args)
        output = args.out or cfg.trace_output
        trace = trace_experiment(cfg)
        write_trace_csv(trace, output)
        _report(f"Wrote {len(trace)} trace point(s) to {output} (final R_S = {trace[-1]:.6f} bits/s/Hz)")
        return 0

    def oracle_check(self, args: argparse.Namespace) -> int:
        cfg = self.load(args)
        report = oracle_check(cfg)
        status = "PASS" if report.ok else "FAIL"
        _report(
            f"{status} | oracle-check: {report.passed}/{report.instances} instances reached "
            f"{report.required_ratio:g} of the grid best (need {report.required_fraction:.0%}), "
            f"worst ratio {min(report.ratios):.4f}"
        )
        return 0 if report.ok else 1

    def selftest(self, args: argparse.Namespace) -> int:
        cfg = self.load(args)
        results = InvariantSuite(cfg, instances=args.instances).run()
        for result in results:
            _report(str(result))
        failed = sum(1 for result in results if not result.passed)
        _report(f"{len(results) - failed}/{len(results)} checks passed")
        return 1 if failed else 0


def _report(message: str) -> None:
    print(message, file=sys.stderr)


def create_parser() -> argparse.ArgumentParser:
    """Create and configure argument parser"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-c', '--config', metavar='FILE',
                        help='Experiment config file (default: built-in defaults)')
    common.add_argument('--seed', type=int, metavar='N', help='Override the base seed')
    common.add_argument('--threads', type=int, metavar='N', help='Worker threads')
    common.add_argument('-v', '--verbose', action='store_true', help='Enable progress output')
    common.add_argument('-d', '--debug', action='store_true',
                        help='Enable debug logging with full tracebacks')

    parser = argparse.ArgumentParser(
        prog='irs-secrecy-sim',
        description='IRS-assisted secrecy-rate simulator',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Distance sweep with three schemes
  python main.py run --config examples/distance_sweep.cfg --out sweep.csv --threads 4

  # Convergence trace of the proposed scheme
  python main.py trace --config examples/convergence.cfg --out trace.csv

  # Inner solver vs exhaustive phase grid
  python main.py oracle-check

  # Quick invariant checks
  python main.py selftest
        """
    )
    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    run_parser = subparsers.add_parser('run', parents=[common], help='Run a Monte-Carlo experiment')
    run_parser.add_argument('-o', '--out', metavar='FILE', help='Result CSV (default: config `output`)')
    run_parser.add_argument('--realizations', type=int, metavar='N', help='Override the realization count')

    trace_parser = subparsers.add_parser('trace', parents=[common], help='Write the AO convergence trace')
    trace_parser.add_argument('-o', '--out', metavar='FILE', help='Trace CSV (default: config `trace_output`)')

    subparsers.add_parser('oracle-check', parents=[common], help='Compare phase optimizer with the exhaustive grid')

    selftest_parser = subparsers.add_parser('selftest', parents=[common], help='Run the invariant checks')
    selftest_parser.add_argument('--instances', type=int, default=10, metavar='N',
                                 help='Random instances per check (default: 10)')

    return parser


def main() -> int:
    """Main entry point"""
    parser = create_parser()
    args = parser.parse_args()

    if not args.command:
        parser.print_help(sys.stderr)
        return 0

    cli = SimulatorCLI(verbose=args.verbose, debug=args.debug)
    handlers = {
        'run': cli.run,
        'trace': cli.trace,
        'oracle-check': cli.oracle_check,
        'selftest': cli.selftest,
    }

    try:
        return handlers[args.command](args)
    except ConfigError as e:
        _report(f"Config error: {e}")
        return 1
    except Exception as e:
        _report(f"Error: {e}")
        if cli.debug:
            import traceback
            traceback.print_exc()
        return 1


if __name__ == '__main__':
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\nInterrupted by user", file=sys.stderr)
        sys.exit(130)
