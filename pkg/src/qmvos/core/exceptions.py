"""
Custom exceptions for the qmvos package.
"""

from pathlib import Path


class QMVOSError(Exception):
    """Base exception for all qmvos errors."""

    pass


class ShapeError(QMVOSError):
    """Tensor extents do not satisfy an operation's shape contract."""

    def __init__(self, op: str, message: str):
        self.op = op
        super().__init__(f"[{op}] {message}")


class ContractError(QMVOSError):
    """An operation was called in violation of its contract."""

    def __init__(self, op: str, message: str):
        self.op = op
        super().__init__(f"[{op}] {message}")


class PreconditionError(ContractError):
    """Required state is missing (empty bank, empty key set, ...)."""

    pass


class InputError(QMVOSError):
    """User-supplied data is invalid."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"Invalid {field}: {message}")


class ConfigurationError(QMVOSError):
    """Configuration is invalid or references unknown options."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"Config field '{field}': {message}")


class FormatError(QMVOSError):
    """A file on disk is malformed or does not match what was expected."""

    def __init__(self, path: str | Path, message: str):
        self.path = Path(path)
        super().__init__(f"{path}: {message}")


class TrainingError(QMVOSError):
    """Training diverged or could not proceed."""

    pass
