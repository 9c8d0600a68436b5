"""Command-line interface.

Exit codes: 0 success, 1 data errors (missing files, mismatched stems),
2 configuration errors (bad config file, invalid flag values).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .pipeline import (
    cmd_augment,
    cmd_build_bank,
    cmd_evaluate,
    cmd_extract_bboxes,
    cmd_replay_plan,
)

EXIT_CONFIG_ERROR = 2


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="pipeline config file (YAML)")
    parser.add_argument("--seed", type=int, default=None, help="override master_seed")
    parser.add_argument("--out", default=None, help="override output_root")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowdpaste",
        description=(
            "Convert segmentation masks to detection labels, synthesize crowded "
            "scenes by copy-paste augmentation, and evaluate detections by IoU."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract-bboxes", help="masks -> YOLO label files + report")
    _add_common(p)

    p = sub.add_parser("build-bank", help="cut sprites from (image, mask) pairs")
    _add_common(p)

    p = sub.add_parser("augment", help="plan and composite augmented images")
    _add_common(p)
    p.add_argument("--engine", choices=("psada", "deng"), default=None,
                   help="placement engine override")
    p.add_argument("--workers", type=int, default=None, help="override worker_count")

    p = sub.add_parser("evaluate", help="match predictions to truths; write reports")
    _add_common(p)
    p.add_argument("--predictions", required=True, help="directory of predicted label files")
    p.add_argument("--truths", required=True, help="directory of ground-truth label files")
    p.add_argument("--dims", default=None,
                   help="image-dimensions manifest (csv: image_id,width,height)")
    p.add_argument("--report-dir", default=None, help="where to write evaluation outputs")

    p = sub.add_parser("replay-plan", help="re-composite a saved paste plan")
    _add_common(p)
    p.add_argument("--plan", required=True, help="plan JSON produced by augment")
    p.add_argument("--replay-dir", default=None, help="where to write the replayed sample")

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)

    try:
        config = load_config(
            args.config,
            seed=args.seed,
            engine=getattr(args, "engine", None),
            workers=getattr(args, "workers", None),
            output_root=args.out,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    if args.command == "extract-bboxes":
        return cmd_extract_bboxes(config)
    if args.command == "build-bank":
        return cmd_build_bank(config)
    if args.command == "augment":
        return cmd_augment(config)
    if args.command == "evaluate":
        return cmd_evaluate(
            config,
            Path(args.predictions),
            Path(args.truths),
            Path(args.dims) if args.dims else None,
            Path(args.report_dir) if args.report_dir else None,
        )
    if args.command == "replay-plan":
        return cmd_replay_plan(
            config,
            Path(args.plan),
            Path(args.replay_dir) if args.replay_dir else None,
        )
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
