import importlib
import logging
import pkgutil
from typing import Any, Dict, Type

from src.core.errors import ConfigError
from src.nn.base import AbstractNetwork

logger = logging.getLogger(__name__)


class NetworkRegistry:
    """
    Registry for network architecture classes, keyed by the ``kind`` of their config.
    """

    def __init__(self):
        self._networks: Dict[str, Type[AbstractNetwork]] = {}

    def __contains__(self, name: str) -> bool:
        return name in self._networks

    def names(self):
        return sorted(self._networks)

    def register(self, network_cls: Type[AbstractNetwork]) -> None:
        """
        Register a network class.

        Args:
            network_cls: The network class to register
        """
        if not issubclass(network_cls, AbstractNetwork):
            raise ValueError(f"{network_cls.__name__} is not a subclass of AbstractNetwork")

        name = network_cls.name
        if name in self._networks and self._networks[name] is not network_cls:
            logger.warning(f"Network with name '{name}' already registered. Overwriting.")

        self._networks[name] = network_cls
        logger.debug(f"Registered network: {name}")

    def get_network(self, config: Any) -> AbstractNetwork:
        """
        Get a network instance for an architecture descriptor.

        Args:
            config: Descriptor whose ``kind`` names a registered network

        Returns:
            An instance of the network bound to ``config``
        """
        kind = getattr(config, "kind", None)
        network_cls = self._networks.get(kind)
        if network_cls is None:
            raise ConfigError(f"No network registered for kind '{kind}' (known: {self.names()})")
        return network_cls(config)

    def discover_and_register_networks(self, package_name: str = "src.nn.networks") -> None:
        """
        Discover and register all networks in the given package.

        Args:
            package_name: The package to scan for networks
        """
        try:
            package = importlib.import_module(package_name)
        except ImportError:
            logger.warning(f"Could not import package: {package_name}")
            return

        for _, name, is_pkg in pkgutil.iter_modules(package.__path__):
            if is_pkg:
                self.discover_and_register_networks(f"{package_name}.{name}")
                continue

            try:
                module = importlib.import_module(f"{package_name}.{name}")

                for attr_name in dir(module):
                    attr = getattr(module, attr_name)
                    if (
                        isinstance(attr, type)
                        and issubclass(attr, AbstractNetwork)
                        and attr is not AbstractNetwork
                        and attr.__module__ == module.__name__
                    ):
                        self.register(attr)

            except (ImportError, AttributeError) as e:
                logger.warning(f"Error importing module {name}: {e}")


# Global singleton instance
network_registry = NetworkRegistry()
