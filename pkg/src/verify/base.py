import abc
import logging
import math
from typing import Any, Dict, List, Optional

from src.models.reports import CheckResult

logger = logging.getLogger(__name__)


class AbstractCheck(abc.ABC):
    """
    Base interface for one family of verification checks.

    A check exposes named cases; the pipeline runs every case on its own so a
    failing case never hides the others. Each check should have a unique name.
    """

    name: str = "abstract_check"
    description: str = ""
    tolerance: float = 1e-4

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        """
        Initialize the check with optional configuration.

        Args:
            config: Options such as ``seed`` or ``tolerance``
        """
        self.config = config or {}
        self.tolerance = float(self.config.get("tolerance", type(self).tolerance))
        self.seed = int(self.config.get("seed", 0))

    @abc.abstractmethod
    def cases(self) -> List[str]:
        """Names of the cases this check runs, in order."""

    @abc.abstractmethod
    def run_case(self, case: str) -> CheckResult:
        """Run one case and report its measured value."""

    def below(self, case: str, value: float, tolerance: Optional[float] = None, message: str = "") -> CheckResult:
        """Passing result when ``value`` is finite and under the tolerance."""
        tolerance = self.tolerance if tolerance is None else tolerance
        passed = math.isfinite(value) and value < tolerance
        if not passed and not message:
            message = f"{value:.3e} exceeds tolerance {tolerance:.1e}"
        return CheckResult(
            check=self.name, case=case, passed=passed, value=float(value), tolerance=tolerance, message=message
        )

    def expect(self, case: str, condition: bool, message: str, value: Optional[float] = None) -> CheckResult:
        return CheckResult(
            check=self.name, case=case, passed=bool(condition), value=value, message="" if condition else message
        )
