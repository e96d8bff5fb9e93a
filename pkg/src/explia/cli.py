"""Command-line entry: explia <subcommand> --config <path> [--seed N] [--out DIR].

Exit codes: 0 success, 1 stage failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import pipeline, synth
from .config import PipelineConfig, dump_config, load_config
from .errors import ConfigError, ExpliaError
from .report import RunReport
from .synth import FIXTURE_COUNTS, FixtureSpec

STAGES = {
    "ingest": pipeline.cmd_ingest,
    "balance": pipeline.cmd_balance,
    "train": pipeline.cmd_train,
    "evaluate": pipeline.cmd_evaluate,
    "explain": pipeline.cmd_explain,
    "agree": pipeline.cmd_agree,
    "rfe": pipeline.cmd_rfe,
    "pipeline": pipeline.cmd_pipeline,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="explia",
        description="Explainable intrusion-detection pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES:
        p = sub.add_parser(name, help=f"run the {name} stage")
        p.add_argument("--config", required=False, help="key = value config file")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument("--data", default=None, help="override the input data directory")

    fx = sub.add_parser("make-fixture", help="write the bundled sample shards")
    fx.add_argument("--out", required=True, help="directory for the CSV shards")
    fx.add_argument("--seed", type=int, default=FixtureSpec(counts={"Benign": 1}).seed)
    return parser


def _load(args) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out_dir = args.out
    if getattr(args, "data", None):
        config.data_dir = args.data
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "make-fixture":
        spec = FixtureSpec(counts=dict(FIXTURE_COUNTS), seed=args.seed)
        paths = synth.write_fixture(args.out, spec)
        print(f"wrote {len(paths)} shards to {args.out}")
        return 0

    try:
        config = _load(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    report = RunReport()
    try:
        result = STAGES[args.command](config, report)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ExpliaError as exc:
        print(f"{args.command} failed: {exc}", file=sys.stderr)
        return 1

    if args.command != "pipeline":
        # single-stage runs persist their counters too
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.write(out / f"report_{args.command}.kv")
    for key, value in sorted(result.items()) if isinstance(result, dict) else []:
        print(f"{args.command}.{key} = {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
