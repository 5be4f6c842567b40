"""Command line entry point.

    degenwave run        --config exp.cfg [--out DIR] [--workers N]
    degenwave threshold  --config exp.cfg ...
    degenwave converge   --config exp.cfg ...
    degenwave entropy    --config exp.cfg ...

Exit codes: 0 success (all hard monitors passed), 1 usage/config/I-O error,
2 hard monitor failure or numerical blow-up.  argparse's default usage-error
code is 2, which would collide with the monitor-failure code, so the parser
is overridden to exit 1 on bad arguments.
"""

from __future__ import annotations

import argparse
import sys

from . import harness
from .solver import BlowupError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_common(sub):
    sub.add_argument("--config", required=True, metavar="PATH",
                     help="experiment config file (key = value sections)")
    sub.add_argument("--out", default=None, metavar="DIR",
                     help="output directory (default ./out; the DEGENWAVE_OUT "
                          "environment variable overrides this flag)")
    sub.add_argument("--workers", type=int, default=1, metavar="N",
                     help="worker processes for sweep members (default 1)")
    sub.add_argument("--snapshot-times", default=None, metavar="LIST",
                     help="comma-separated snapshot times overriding the config")
    sub.add_argument("--no-plots", action="store_true",
                     help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="degenwave",
                     description="viscous simulations of the degenerate "
                                 "quasilinear wave system in Riemann coordinates")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run", "single simulation with monitors"),
        ("threshold", "existence/nonexistence classification sweep"),
        ("converge", "delta sweep with L1 differences and weak-form residuals"),
        ("entropy", "entropy-pair residual and quadrature oracle tables"),
    ):
        _add_common(subs.add_parser(name, help=text))
    return parser


COMMANDS = {
    "run": harness.cmd_run,
    "threshold": harness.cmd_threshold,
    "converge": harness.cmd_converge,
    "entropy": harness.cmd_entropy,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = harness.parse_config(args.config)
        if args.snapshot_times:
            cfg.snapshot_times = harness._floats(args.snapshot_times)
        if args.no_plots:
            cfg.plots = False
        out = harness.resolve_out(args.out)
        return COMMANDS[args.command](cfg, out, workers=args.workers)
    except harness.ConfigError as exc:
        print(f"degenwave: config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"degenwave: i/o error: {exc}", file=sys.stderr)
        return 1
    except BlowupError as exc:
        print(f"degenwave: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
