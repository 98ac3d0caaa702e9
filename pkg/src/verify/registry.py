import importlib
import logging
import pkgutil
from typing import Any, Dict, List, Optional, Type

from src.core.errors import ConfigError
from src.verify.base import AbstractCheck

logger = logging.getLogger(__name__)


class CheckRegistry:
    """
    Registry for verification check classes. Manages check registration and retrieval.
    """

    def __init__(self):
        self._checks: Dict[str, Type[AbstractCheck]] = {}

    def __contains__(self, name: str) -> bool:
        return name in self._checks

    def names(self) -> List[str]:
        return sorted(self._checks)

    def register(self, check_cls: Type[AbstractCheck]) -> None:
        """
        Register a check class.

        Args:
            check_cls: The check class to register
        """
        if not issubclass(check_cls, AbstractCheck):
            raise ValueError(f"{check_cls.__name__} is not a subclass of AbstractCheck")

        name = check_cls.name
        if name in self._checks and self._checks[name] is not check_cls:
            logger.warning(f"Check with name '{name}' already registered. Overwriting.")

        self._checks[name] = check_cls
        logger.debug(f"Registered check: {name}")

    def get_check(self, name: str, config: Optional[Dict[str, Any]] = None) -> AbstractCheck:
        check_cls = self._checks.get(name)
        if check_cls is None:
            raise ConfigError(f"No verification check named '{name}' (known: {self.names()})")
        return check_cls(config)

    def get_checks(
        self, names: Optional[List[str]] = None, configs: Optional[Dict[str, Dict[str, Any]]] = None
    ) -> List[AbstractCheck]:
        """
        Instantiate the named checks, or every registered check in name order.

        Args:
            names: Subset of check names to run
            configs: Optional configurations keyed by check name
        """
        configs = configs or {}
        return [self.get_check(name, configs.get(name)) for name in (names or self.names())]

    def discover_and_register_checks(self, package_name: str = "src.verify.checks") -> None:
        """
        Discover and register all checks in the given package.

        Args:
            package_name: The package to scan for checks
        """
        try:
            package = importlib.import_module(package_name)
        except ImportError:
            logger.warning(f"Could not import package: {package_name}")
            return

        for _, name, is_pkg in pkgutil.iter_modules(package.__path__):
            if is_pkg:
                self.discover_and_register_checks(f"{package_name}.{name}")
                continue

            try:
                module = importlib.import_module(f"{package_name}.{name}")

                for attr_name in dir(module):
                    attr = getattr(module, attr_name)
                    if (
                        isinstance(attr, type)
                        and issubclass(attr, AbstractCheck)
                        and attr is not AbstractCheck
                        and attr.__module__ == module.__name__
                    ):
                        self.register(attr)

            except (ImportError, AttributeError) as e:
                logger.warning(f"Error importing module {name}: {e}")


# Global singleton instance
check_registry = CheckRegistry()
