"""Command-line entry point.

    netport backtest --config run.yaml [--network kind] [--out dir] [--jobs N]
    netport synth --assets N --months M --seed S --rho LEVEL --out path.csv

Exit codes: 0 success, 2 configuration error, 3 data error,
4 solver-failure rate exceeded. Errors are printed to stderr as a single
``netport: error[<category>]: <message>`` line.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .backtest import run_backtest
from .config import RunConfig, load_config
from .errors import BacktestError, ConfigError, NetportError
from .market_data import load_returns
from .networks import KINDS
from .report import summary_table, write_outputs
from .synth import synthetic_returns, write_long_csv

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_SOLVER = 4


def _fail(category: str, message: str, code: int) -> int:
    message = " ".join(str(message).split())
    print(f"netport: error[{category}]: {message}", file=sys.stderr)
    return code


def _load(cfg: RunConfig):
    if cfg.mode == "synthetic":
        return synthetic_returns(cfg.synth_assets, cfg.synth_months, cfg.seed, cfg.synth_rho)
    return load_returns(cfg.input, mode=cfg.mode, layout=cfg.layout)


def cmd_backtest(cfg: RunConfig, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        returns = _load(cfg)
    except NetportError as exc:
        return _fail("data", exc, EXIT_DATA)
    except OSError as exc:
        return _fail("data", exc, EXIT_DATA)
    for kind in cfg.networks:
        try:
            report = run_backtest(returns, cfg.strategy(kind), jobs=cfg.jobs)
        except BacktestError as exc:
            return _fail("solver", exc, EXIT_SOLVER)
        except NetportError as exc:
            return _fail("data", exc, EXIT_DATA)
        write_outputs(report, Path(cfg.out_dir) / kind)
        print(summary_table(report), file=out)
        print(file=out)
    return 0


def cmd_synth(args) -> int:
    try:
        returns = synthetic_returns(args.assets, args.months, args.seed, args.rho)
    except ValueError as exc:
        return _fail("config", exc, EXIT_CONFIG)
    write_long_csv(returns, args.out)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        sys.exit(_fail("config", message, EXIT_CONFIG))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netport", description="Network-based multi-objective portfolio backtests.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    bt = sub.add_parser("backtest", help="run the rolling-window backtest")
    bt.add_argument("--config", required=True, help="YAML run configuration")
    bt.add_argument("--network", choices=KINDS, help="run only this network kind")
    bt.add_argument("--out", help="output directory (overrides out_dir)")
    bt.add_argument("--jobs", type=int, help="worker processes (default: all cores)")

    sy = sub.add_parser("synth", help="write a synthetic returns CSV (long format)")
    sy.add_argument("--assets", type=int, required=True)
    sy.add_argument("--months", type=int, required=True)
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--rho", type=float, default=0.3, help="common-factor correlation level in [0, 1]")
    sy.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "synth":
        return cmd_synth(args)
    try:
        cfg = load_config(args.config).with_overrides(
            networks=(args.network,) if args.network else None,
            out_dir=args.out,
            jobs=args.jobs,
        )
    except ConfigError as exc:
        return _fail("config", exc, EXIT_CONFIG)
    return cmd_backtest(cfg)


if __name__ == "__main__":
    sys.exit(main())
