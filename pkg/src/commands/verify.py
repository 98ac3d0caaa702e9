"""``verify``: the 64-bit gradient, identity, adjointness and receptive-field suite."""

import logging

from src.core.config import RunConfig
from src.core.constants import Constants
from src.verify import run_verification

logger = logging.getLogger(__name__)


def run(config: RunConfig) -> int:
    report = run_verification(config.checks or None, {"seed": config.verify_seed})
    for result in report.results:
        mark = "✅" if result.passed else "❌"
        value = "" if result.value is None else f" value={result.value:.3e}"
        detail = f" - {result.message}" if result.message else ""
        print(f"{mark} {result.label}{value} ({result.seconds:.2f}s){detail}")

    failures = report.failures
    print(f"{len(report.results) - len(failures)}/{len(report.results)} checks passed in {report.seconds:.1f}s")
    if failures:
        logger.error(f"Verification failed: {', '.join(r.label for r in failures)}")
        return Constants.EXIT_VALIDATION
    return Constants.EXIT_OK
