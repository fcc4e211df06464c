"""Command-line entry point: ``albench run | analyze | synth``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .analysis import REPORT_KINDS, AnalysisError
from .config import ConfigError, load_config
from .dataset import DatasetError, make_blobs, write_table
from .runner import export_reports, run_matrix


def build_parser():
    parser = argparse.ArgumentParser(prog="albench", description="Active-learning benchmark harness.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run (or resume) an experiment matrix")
    run.add_argument("--config", required=True, help="flat key = value config file")
    run.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    run.add_argument("--out", help="output directory (overrides output_dir in the config)")

    analyze = sub.add_parser("analyze", help="export a report table from a results directory")
    analyze.add_argument("--in", dest="source", required=True, help="run directory or results CSV")
    analyze.add_argument("--report", required=True, choices=REPORT_KINDS)
    analyze.add_argument("--out", required=True, help="report CSV path")

    synth = sub.add_parser("synth", help="write a synthetic Gaussian-blob dataset")
    synth.add_argument("--classes", type=int, required=True)
    synth.add_argument("--dim", type=int, required=True)
    synth.add_argument("--per-class", type=int, required=True)
    synth.add_argument("--separation", type=float, required=True)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            config = load_config(args.config)
            if args.workers < 1:
                raise ConfigError("--workers must be at least 1")
            path = run_matrix(config, workers=args.workers, out=args.out,
                              progress=lambda done, total: logging.info("%d/%d trials", done, total))
            print(path)
        elif args.command == "analyze":
            export_reports(args.source, args.report, args.out)
            print(args.out)
        else:
            bundle = make_blobs(args.classes, args.dim, args.per_class, args.separation,
                                np.random.default_rng(args.seed))
            write_table(bundle, args.out)
            print(args.out)
    except (ConfigError, DatasetError, AnalysisError, OSError) as exc:
        print(f"albench: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
