import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from src.commands import COMMANDS
from src.core.config import init_config, parse_assignments
from src.core.errors import RecycleGANError, exit_code_for
from src.core.logging import setup_logging

logger = logging.getLogger(__name__)

VERSION = "1.0.0"


def _csv_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rgan", description=f"Desk-scale unpaired video retargeting v{VERSION}"
    )
    parser.add_argument("--conf", help="Path to config toml file", type=str)
    parser.add_argument("--log-level", help="override log_level in config", type=str)
    parser.add_argument(
        "--set",
        dest="assignments",
        action="append",
        metavar="KEY=VALUE",
        help="override any config key, dotted for sections (train.lr=1e-4); repeatable",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", help="write both synthetic domains and the manifest")
    gen.add_argument("--data-dir", type=str, help="output dataset directory")
    gen.add_argument("--frames", type=int, help="frames per stream")
    gen.add_argument("--image-size", type=int, help="frame height and width")
    gen.add_argument("--seed", type=int, help="seed of domain X; domain Y uses seed+1")
    gen.add_argument("--conditions", type=_csv_list, help="comma-separated conditions, e.g. day,night")
    gen.add_argument("--task", choices=["image2image", "image2labels"], help="which ground-truth map links X to Y")
    gen.add_argument("--force", action="store_true", default=None, help="overwrite a non-empty output directory")

    train = sub.add_parser("train", help="train generators, discriminators and predictors")
    train.add_argument("--data-dir", type=str, help="dataset directory written by gen-data")
    train.add_argument("--run-dir", type=str, help="directory for the checkpoint and loss CSV")
    train.add_argument("--loss", choices=["cycle", "recycle", "combined"], help="which reconstruction terms to train with")
    train.add_argument("--steps", type=int, help="total optimizer steps")
    train.add_argument("--seed", type=int, help="training seed")
    train.add_argument("--image-size", type=int, help="frame height and width")
    train.add_argument("--resume", type=str, help="checkpoint to continue from")

    infer = sub.add_parser("infer", help="translate a stored stream with a checkpoint")
    infer.add_argument("--checkpoint", type=str, help="checkpoint file (default: <run-dir>/checkpoint.rgan)")
    infer.add_argument("--run-dir", type=str, help="training run directory")
    infer.add_argument("--data-dir", type=str, help="dataset directory for the default input stream")
    infer.add_argument("--input", dest="input_dir", type=str, help="stream directory to translate")
    infer.add_argument("--output", dest="output_dir", type=str, help="directory for the generated stream")
    infer.add_argument("--domain", choices=["X", "Y"], help="domain of the input stream")
    infer.add_argument("--smooth", action="store_true", default=None, help="blend framewise output with the predictor")

    evaluate = sub.add_parser("eval", help="score checkpoints on held-out streams")
    evaluate.add_argument("--checkpoint", type=str, help="checkpoint file (default: <run-dir>/checkpoint.rgan)")
    evaluate.add_argument("--compare", dest="compare_checkpoint", type=str, help="second checkpoint for a comparison table")
    evaluate.add_argument("--run-dir", type=str, help="training run directory")
    evaluate.add_argument("--data-dir", type=str, help="dataset directory the oracle segmenter trains on")
    evaluate.add_argument("--input", dest="input_dir", type=str, help="stored X stream to evaluate on")
    evaluate.add_argument("--output", dest="output_dir", type=str, help="directory for the report files")
    evaluate.add_argument("--segmenter", dest="segmenter_path", type=str, help="oracle segmenter file")
    evaluate.add_argument("--diversity-sample", type=int, help="frames sampled by the diversity probe")

    verify = sub.add_parser("verify", help="run the 64-bit verification suite")
    verify.add_argument("--checks", type=_csv_list, help="comma-separated subset of checks")
    verify.add_argument("--seed", type=int, help="seed of the random probes")
    return parser


# argparse destination -> config keys it sets
FLAG_KEYS = {
    "data_dir": ("data_dir",),
    "run_dir": ("run_dir",),
    "checkpoint": ("checkpoint",),
    "compare_checkpoint": ("compare_checkpoint",),
    "resume": ("resume",),
    "input_dir": ("input_dir",),
    "output_dir": ("output_dir",),
    "segmenter_path": ("segmenter_path",),
    "force": ("force",),
    "frames": ("frames", "scene.frames"),
    "image_size": ("image_size", "scene.image_size", "train.image_size"),
    "conditions": ("conditions",),
    "task": ("scene.task",),
    "loss": ("train.loss_mode",),
    "steps": ("train.steps",),
    "domain": ("domain",),
    "smooth": ("smooth",),
    "diversity_sample": ("diversity_sample",),
    "checks": ("checks",),
    "log_level": ("log_level",),
}

SEED_KEYS = {
    "gen-data": "seed_x",
    "train": "train.seed",
    "verify": "verify_seed",
}


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Dotted config overrides from ``--set`` first, then from the explicit flags."""
    overrides: Dict[str, Any] = parse_assignments(getattr(args, "assignments", None))
    overrides["command"] = args.command
    for dest, keys in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        for key in keys:
            overrides[key] = value
    seed = getattr(args, "seed", None)
    if seed is not None:
        overrides[SEED_KEYS[args.command]] = seed
        if args.command == "gen-data":
            overrides["seed_y"] = seed + 1
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level or "INFO")

    try:
        config = init_config(config_file=args.conf, overrides=overrides_from_args(args))
        setup_logging(config.log_level)
        logger.debug(f"Running {args.command} with {config.model_dump(mode='json')}")
        return COMMANDS[args.command](config)
    except RecycleGANError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return exit_code_for(e)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
