"""One module per subcommand; each exposes ``run(config) -> exit code``."""

from typing import Callable, Dict

from src.commands import evaluate, gen_data, infer, train, verify
from src.core.config import RunConfig

Command = Callable[[RunConfig], int]

COMMANDS: Dict[str, Command] = {
    "gen-data": gen_data.run,
    "train": train.run,
    "infer": infer.run,
    "eval": evaluate.run,
    "verify": verify.run,
}

__all__ = ["COMMANDS", "Command"]
