"""Command-line experiment runner.

    xbarlstm train --config exp.ini --out runs/a
    xbarlstm sweep --config exp.ini --threads 4
    xbarlstm noise-sweep --config exp.ini
    xbarlstm cost [--config hw.ini] --out runs/cost

Every run writes manifest.json (re-runnable as --config), report.json and
metrics.csv into the output directory.  The config file's [experiment]
section may set command/task/out/seed/threads; the subcommand and the
command-line flags take precedence.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path

from .experiment import (
    EXIT_CONFIG,
    EXIT_OK,
    ConfigError,
    load_config,
    run,
    run_experiment,
)
from .hwcost import InfeasibleHardware
from .training import TrainingDiverged
from .experiment import EXIT_DIVERGED, EXIT_INFEASIBLE


def _add_common(sub):
    sub.add_argument("--config", type=str, default=None, help="INI or JSON config file")
    sub.add_argument("--out", type=str, default=None, help="output directory")
    sub.add_argument("--seed", type=int, default=None, help="root seed (u64)")
    sub.add_argument("--threads", type=int, default=None,
                     help="concurrent sweep cells (default 1)")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="xbarlstm",
                                     description="Crossbar LSTM experiment harness")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, desc in [("train", "train and evaluate one configuration"),
                       ("sweep", "bit-width grid sweep"),
                       ("noise-sweep", "weight/ADC noise sweep"),
                       ("cost", "hardware cost report")]:
        _add_common(subs.add_parser(name, help=desc))
    args = parser.parse_args(argv)

    if args.config is None:
        if args.command != "cost":
            print(f"config error: {args.command} requires --config", file=sys.stderr)
            return EXIT_CONFIG
        # cost runs on defaults without a config file
        with tempfile.NamedTemporaryFile("w", suffix=".ini", delete=False) as fh:
            fh.write("[experiment]\ncommand = cost\n")
            path = fh.name
        code = run(path, out_dir=args.out or "runs/cost", seed=args.seed,
                   threads=args.threads)
        Path(path).unlink(missing_ok=True)
        return code

    # the subcommand on the command line overrides the config's command
    try:
        cfg = load_config(args.config, out_dir=args.out, seed=args.seed,
                          threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.command != args.command:
        cfg.command = args.command
        try:
            cfg.__post_init__()
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        report = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingDiverged as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except InfeasibleHardware as exc:
        print(f"infeasible hardware: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    summary = {k: report[k] for k in ("task", "metric_name") if k in report}
    print(json.dumps({"out": cfg.out_dir, **summary}))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
