"""Core module exports."""

from qmvos.core.exceptions import (
    QMVOSError,
    ShapeError,
    ContractError,
    PreconditionError,
    InputError,
    ConfigurationError,
    FormatError,
    TrainingError,
)
from qmvos.core.protocols import AffinityKernel, SceneLayout
from qmvos.core.registry import ComponentRegistry

__all__ = [
    # Protocols
    "AffinityKernel",
    "SceneLayout",
    # Registry
    "ComponentRegistry",
    # Exceptions
    "QMVOSError",
    "ShapeError",
    "ContractError",
    "PreconditionError",
    "InputError",
    "ConfigurationError",
    "FormatError",
    "TrainingError",
]
