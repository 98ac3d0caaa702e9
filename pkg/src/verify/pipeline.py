import logging
import time
from typing import List, Optional

from src.models.reports import CheckResult, VerifyReport
from src.verify.base import AbstractCheck

logger = logging.getLogger(__name__)


class VerificationPipeline:
    """
    Runs a sequence of checks case by case.

    An exception inside a case becomes a failed result carrying the error, and
    the pipeline moves on to the next case.
    """

    def __init__(self, checks: Optional[List[AbstractCheck]] = None):
        self.checks = checks or []

    def run_check(self, check: AbstractCheck) -> List[CheckResult]:
        results = []
        for case in check.cases():
            start = time.perf_counter()
            try:
                result = check.run_case(case)
            except Exception as e:
                logger.error(f"Error in check '{check.name}' case '{case}': {e}")
                result = CheckResult(
                    check=check.name, case=case, passed=False, message=f"{type(e).__name__}: {e}"
                )
            result.seconds = time.perf_counter() - start
            if result.passed:
                logger.debug(f"check {result.label} passed (value={result.value})")
            else:
                logger.warning(f"check {result.label} FAILED: {result.message}")
            results.append(result)
        return results

    def run(self) -> VerifyReport:
        start = time.perf_counter()
        report = VerifyReport()
        for check in self.checks:
            logger.info(f"Running check '{check.name}'")
            report.results.extend(self.run_check(check))
        report.seconds = time.perf_counter() - start
        logger.info(
            f"Verification finished: {len(report.results) - len(report.failures)}/{len(report.results)} "
            f"cases passed in {report.seconds:.1f}s"
        )
        return report
