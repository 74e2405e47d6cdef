"""
Component registry for named, pluggable components.

Uses decorator-based registration for extensibility.
"""

import logging
from collections.abc import Callable
from typing import TypeVar

from qmvos.core.exceptions import ConfigurationError
from qmvos.core.protocols import AffinityKernel, SceneLayout

logger = logging.getLogger(__name__)

T = TypeVar("T")


class ComponentRegistry:
    """
    Registry for memory affinity kernels and synthetic scenarios.

    Components register themselves using decorators; instances are created
    lazily and shared, since every registered component is stateless.

    Example:
        >>> @ComponentRegistry.register_affinity("dot")
        ... class DotProductAffinity:
        ...     name = "dot"

        >>> kernel = ComponentRegistry.get_affinity("dot")
    """

    _affinities: dict[str, type[AffinityKernel]] = {}
    _scenarios: dict[str, type[SceneLayout]] = {}

    # Component instances (lazy-loaded singletons)
    _affinity_instances: dict[str, AffinityKernel] = {}
    _scenario_instances: dict[str, SceneLayout] = {}

    @classmethod
    def register_affinity(cls, name: str) -> Callable[[type[T]], type[T]]:
        """
        Decorator to register an affinity kernel.

        Args:
            name: Unique identifier used in RunConfig.affinity
        """

        def decorator(kernel_cls: type[T]) -> type[T]:
            cls._affinities[name] = kernel_cls  # type: ignore[assignment]
            logger.debug(f"Registered affinity kernel: {name}")
            return kernel_cls

        return decorator

    @classmethod
    def register_scenario(cls, name: str) -> Callable[[type[T]], type[T]]:
        """Decorator to register a synthetic scenario."""

        def decorator(layout_cls: type[T]) -> type[T]:
            cls._scenarios[name] = layout_cls  # type: ignore[assignment]
            logger.debug(f"Registered scenario: {name}")
            return layout_cls

        return decorator

    @classmethod
    def get_affinity(cls, name: str) -> AffinityKernel:
        """
        Get an affinity kernel instance by name.

        Raises:
            ConfigurationError: If the kernel is not registered
        """
        if name not in cls._affinity_instances:
            if name not in cls._affinities:
                available = list(cls._affinities.keys())
                raise ConfigurationError(
                    "affinity", f"kernel '{name}' not found. Available: {available}"
                )
            cls._affinity_instances[name] = cls._affinities[name]()
        return cls._affinity_instances[name]

    @classmethod
    def get_scenario(cls, name: str) -> SceneLayout:
        """Get a scenario instance by name."""
        if name not in cls._scenario_instances:
            if name not in cls._scenarios:
                available = list(cls._scenarios.keys())
                raise ConfigurationError(
                    "scenario", f"scenario '{name}' not found. Available: {available}"
                )
            cls._scenario_instances[name] = cls._scenarios[name]()
        return cls._scenario_instances[name]

    @classmethod
    def list_affinities(cls) -> list[str]:
        """List all registered affinity kernel names."""
        return list(cls._affinities.keys())

    @classmethod
    def list_scenarios(cls) -> list[str]:
        """List all registered scenario names."""
        return list(cls._scenarios.keys())
