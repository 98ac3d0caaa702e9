from contextlib import contextmanager
from typing import Any, Dict, Iterator, List, Optional

from src.models.reports import VerifyReport
from src.tensor import backward_hook
from src.verify.base import AbstractCheck
from src.verify.pipeline import VerificationPipeline
from src.verify.registry import CheckRegistry, check_registry

# Discover and register all checks
check_registry.discover_and_register_checks()


def run_verification(
    names: Optional[List[str]] = None, config: Optional[Dict[str, Any]] = None
) -> VerifyReport:
    """Run the named checks (default: all) with one shared config."""
    names = names or check_registry.names()
    checks = check_registry.get_checks(names, {name: config or {} for name in names})
    return VerificationPipeline(checks).run()


@contextmanager
def corrupted_gradient(op: str, factor: float = 1.5) -> Iterator[None]:
    """Scale the first input gradient of every ``op`` entry; the suite must name the damage."""

    def corrupt(grads):
        grads = list(grads)
        if grads and grads[0] is not None:
            grads[0] = grads[0] * factor
        return grads

    with backward_hook(op, corrupt):
        yield


__all__ = [
    "AbstractCheck",
    "CheckRegistry",
    "check_registry",
    "VerificationPipeline",
    "run_verification",
    "corrupted_gradient",
]
